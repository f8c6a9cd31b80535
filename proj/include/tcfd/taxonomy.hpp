#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tcfd {

enum class Pillar { Governance, Strategy, RiskManagement, MetricsTargets, None };
enum class Granularity { General, Category, Fine };

std::string_view to_string(Pillar p);
std::string_view to_string(Granularity g);
Pillar parse_pillar(std::string_view s);
Granularity parse_granularity(std::string_view s);

struct Label {
  std::string code;
  Pillar pillar = Pillar::None;
  Granularity granularity = Granularity::Fine;
  std::string description;

  bool operator==(const Label&) const = default;
};

inline constexpr std::string_view kNoneCode = "NONE";
inline constexpr std::string_view kDefaultTemplate = "This example is about {}.";

/// Ordered, immutable collection of labels. Codes are case-sensitive keys.
class LabelSet {
 public:
  LabelSet() = default;
  LabelSet(std::vector<Label> labels, std::string version);

  const std::vector<Label>& labels() const noexcept { return labels_; }
  const std::string& version() const noexcept { return version_; }
  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }

  auto begin() const noexcept { return labels_.begin(); }
  auto end() const noexcept { return labels_.end(); }
  const Label& operator[](std::size_t i) const { return labels_[i]; }

  std::size_t count(Granularity g) const;
  std::size_t count(Pillar p, Granularity g) const;

  /// Throws ConfigError if the code is unknown.
  const Label& lookup(std::string_view code) const;
  const Label* find(std::string_view code) const noexcept;
  std::optional<std::size_t> index_of(std::string_view code) const noexcept;

  bool contains(std::string_view code) const noexcept { return find(code) != nullptr; }

 private:
  std::vector<Label> labels_;
  std::string version_;
};

/// The 23-label TCFD system: 4 general pillar labels, 4 climate-related
/// category labels, 14 fine-grained labels and NONE.
LabelSet builtin_taxonomy();

/// Substitutes the label description into a template containing exactly one
/// "{}" placeholder. Throws TemplateError otherwise.
std::string hypothesis_for(const Label& label, std::string_view tmpl);

/// Parent category code of a fine label ("GO.1.1" -> "GO.1").
std::string parent_code(std::string_view code);

struct ValidationFinding {
  enum class Kind { DuplicateCode, EmptyDescription, OrphanFine };
  Kind kind;
  std::string code;
  std::string message;
};

std::vector<ValidationFinding> validate(const LabelSet& set);

}  // namespace tcfd
