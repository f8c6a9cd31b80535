#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tcfd/corpus.hpp"
#include "tcfd/error.hpp"
#include "tcfd/taxonomy.hpp"

namespace tcfd {

/// Raw three-way logits of an NLI classifier for one (premise, hypothesis).
struct NliScores {
  double entailment = 0;
  double contradiction = 0;
  double neutral = 0;
};

/// Two-way softmax over entailment and contradiction; the neutral logit is
/// ignored. Throws DomainError if either used logit is not finite.
double entailment_probability(const NliScores& scores);

/// Max-subtracted softmax.
std::vector<double> softmax(std::span<const double> logits);

/// A three-way NLI scorer. Implementations must be callable concurrently
/// from several threads.
class ScorerBackend {
 public:
  virtual ~ScorerBackend() = default;
  virtual std::string identity() const = 0;
  virtual std::size_t max_premise_tokens() const = 0;
  virtual std::size_t max_hypothesis_tokens() const = 0;
  virtual NliScores score(std::string_view premise, std::string_view hypothesis) const = 0;
};

/// Jaccard overlap of lowercased, stopword-filtered token sets; 0 when both
/// sets are empty.
double token_jaccard(std::string_view a, std::string_view b);

/// Deterministic lexical stand-in for an NLI model: entailment = 8J - 2,
/// contradiction = -entailment, neutral = 0. J = 0.25 maps to p = 0.5.
NliScores lexical_mock_score(std::string_view premise, std::string_view hypothesis);

class LexicalMockScorer final : public ScorerBackend {
 public:
  explicit LexicalMockScorer(std::size_t max_premise_tokens = 1024)
      : max_premise_(max_premise_tokens) {}
  std::string identity() const override { return "lexical-mock/jaccard(8,-2)"; }
  std::size_t max_premise_tokens() const override { return max_premise_; }
  std::size_t max_hypothesis_tokens() const override { return 256; }
  NliScores score(std::string_view premise, std::string_view hypothesis) const override {
    return lexical_mock_score(premise, hypothesis);
  }

 private:
  std::size_t max_premise_;
};

/// Hypothesis wording. `general` optionally overrides the template for
/// General-granularity labels.
class HypothesisTemplate {
 public:
  explicit HypothesisTemplate(std::string text = std::string(kDefaultTemplate),
                              std::optional<std::string> general = std::nullopt);

  const std::string& text() const noexcept { return text_; }
  const std::optional<std::string>& general() const noexcept { return general_; }
  std::string render(const Label& label) const;
  std::string hash() const;

 private:
  std::string text_;
  std::optional<std::string> general_;
};

struct LabelProbability {
  std::string sequence_id;
  std::string label_code;
  double p = 0;
};

/// Multi-label zero-shot classification: one independent entailment
/// probability per label, in LabelSet order. Premises over the backend's
/// token limit are truncated from the right; a warning is appended when
/// `warnings` is non-null. Backend failures surface as ScoringError.
std::vector<LabelProbability> classify(const TextSequence& sequence, const LabelSet& labels,
                                       const ScorerBackend& backend, const HypothesisTemplate& tmpl,
                                       std::vector<Warning>* warnings = nullptr);

/// Single-label contrast mode: softmax over the per-label entailment logits.
std::vector<LabelProbability> classify_single_label(const TextSequence& sequence,
                                                    const LabelSet& labels,
                                                    const ScorerBackend& backend,
                                                    const HypothesisTemplate& tmpl,
                                                    std::vector<Warning>* warnings = nullptr);

struct Provenance {
  std::string backend;
  std::string template_text;
  std::string general_template;  // empty when the main template is used
  std::string template_hash;
  std::string taxonomy_version;

  bool operator==(const Provenance&) const = default;
};

struct ProbabilityRow {
  std::string sequence_id;
  std::string report_id;
  std::string label_code;
  double p = 0;

  bool operator==(const ProbabilityRow&) const = default;
};

struct ProbabilityTable {
  Provenance provenance;
  std::vector<ProbabilityRow> rows;
};

struct BatchOptions {
  std::size_t batch_size = 32;
  std::size_t workers = 1;
};

struct BatchFailure {
  std::string sequence_id;
  std::string label_code;
  std::string message;
};

struct BatchResult {
  ProbabilityTable table;
  std::vector<BatchFailure> failures;  // sequences with a failure contribute no rows
  std::vector<Warning> warnings;
};

/// Classifies every sequence against every label. The table equals the
/// concatenation of per-sequence classify() results in input order for any
/// batch size or worker count.
BatchResult batch_classify(std::span<const TextSequence> sequences, const LabelSet& labels,
                           const ScorerBackend& backend, const HypothesisTemplate& tmpl,
                           const BatchOptions& options = {});

}  // namespace tcfd
