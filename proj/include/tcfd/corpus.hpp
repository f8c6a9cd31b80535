#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tcfd/error.hpp"
#include "tcfd/pdf.hpp"

namespace tcfd {

enum class Region { AsiaPacific, Europe, LatinAmerica, MiddleEastAfrica, NorthAmerica };
enum class SizeClass { Large, Medium, Small };
enum class ReportCategory {
  Annual,
  CDP,
  CorporateGovernance,
  Integrated,
  Remuneration,
  Sustainability,
  TCFD
};
enum class BlockTag { BodyContent, Abstract, Title, Figure, Table, Other };

inline constexpr std::array kRegions = {Region::AsiaPacific, Region::Europe, Region::LatinAmerica,
                                        Region::MiddleEastAfrica, Region::NorthAmerica};
inline constexpr std::array kSizeClasses = {SizeClass::Large, SizeClass::Medium, SizeClass::Small};
inline constexpr std::array kReportCategories = {
    ReportCategory::Annual,       ReportCategory::CDP,            ReportCategory::CorporateGovernance,
    ReportCategory::Integrated,   ReportCategory::Remuneration,   ReportCategory::Sustainability,
    ReportCategory::TCFD};

std::string_view to_string(Region r);
std::string_view to_string(SizeClass s);
std::string_view to_string(ReportCategory c);
std::string_view to_string(BlockTag t);
Region parse_region(std::string_view s);
SizeClass parse_size_class(std::string_view s);
ReportCategory parse_report_category(std::string_view s);
BlockTag parse_block_tag(std::string_view s);

/// Large above USD 500bn, Medium on the closed interval [50bn, 500bn],
/// Small below 50bn. Throws DomainError for negative or non-finite input.
SizeClass classify_size(double total_assets_usd);

struct BankRecord {
  std::string bank_id;
  std::string name;
  Region region = Region::Europe;
  double total_assets_usd = 0;

  SizeClass size_class() const { return classify_size(total_assets_usd); }
};

struct ReportDocument {
  std::string report_id;
  std::string bank_id;
  ReportCategory category = ReportCategory::Annual;
  int financial_year = 0;
  std::size_t page_count = 0;  // 0 until extracted
  std::string path;
};

struct LayoutBlock {
  std::string report_id;
  std::size_t block_index = 0;
  BlockTag tag = BlockTag::Other;
  std::string text;
  std::size_t page = 0;  // 1-based

  bool operator==(const LayoutBlock&) const = default;
};

struct TextSequence {
  std::string sequence_id;
  std::string report_id;
  std::size_t ordinal = 0;
  std::string text;
  std::size_t token_count = 0;

  bool operator==(const TextSequence&) const = default;
};

// ---------------------------------------------------------------------------
// Extraction

struct Extraction {
  std::vector<LayoutBlock> blocks;
  std::size_t page_count = 0;
  std::vector<Warning> warnings;
};

class BlockExtractor {
 public:
  virtual ~BlockExtractor() = default;
  virtual std::string identity() const = 0;
  /// Throws ExtractionError for documents that cannot be read.
  virtual Extraction extract(const std::string& report_id,
                             std::span<const std::uint8_t> document) const = 0;
};

/// Thresholds of the heuristic layout tagger. A block is a Table when its
/// digit density exceeds `table_digit_density` or its mean line length is
/// below `table_min_words_per_line`; otherwise BodyContent.
struct LayoutHeuristics {
  double table_digit_density = 0.4;
  double table_min_words_per_line = 3.0;
  double line_merge_tolerance = 0.5;  // fraction of font size
  double block_gap_factor = 1.5;      // baseline distance / font size
  double font_change_ratio = 0.2;
};

/// Built-in backend: reads text from the PDF and tags blocks heuristically.
class HeuristicExtractor final : public BlockExtractor {
 public:
  explicit HeuristicExtractor(LayoutHeuristics params = {}) : params_(params) {}
  std::string identity() const override { return "heuristic-layout-1"; }
  Extraction extract(const std::string& report_id,
                     std::span<const std::uint8_t> document) const override;

 private:
  LayoutHeuristics params_;
};

/// Adapter for blocks tagged by an external layout model. The document bytes
/// are ignored; blocks are looked up by report id.
class PretaggedExtractor final : public BlockExtractor {
 public:
  explicit PretaggedExtractor(std::vector<LayoutBlock> blocks, std::string source = "pretagged");
  std::string identity() const override { return "pretagged:" + source_; }
  Extraction extract(const std::string& report_id,
                     std::span<const std::uint8_t> document) const override;

 private:
  std::map<std::string, std::vector<LayoutBlock>> by_report_;
  std::string source_;
};

/// Groups positioned text runs of one page into tagged layout blocks.
/// `first_index` numbers the blocks continuously across pages.
std::vector<LayoutBlock> layout_page(const std::string& report_id, std::size_t page,
                                     std::span<const pdf::TextRun> runs, std::size_t first_index,
                                     const LayoutHeuristics& params = {});

BlockTag tag_block(std::string_view text, std::size_t line_count, const LayoutHeuristics& params = {});

Extraction extract_blocks(const std::string& report_id, std::span<const std::uint8_t> document,
                          const BlockExtractor& extractor);

// ---------------------------------------------------------------------------
// Filtering and segmentation

/// Keeps BodyContent and Abstract blocks in their original order.
std::vector<LayoutBlock> filter_body(std::span<const LayoutBlock> blocks);

struct SegmentationConfig {
  enum class Unit { Sentence, Block };
  Unit unit = Unit::Sentence;
  std::size_t max_tokens = 512;
};

struct Segmentation {
  std::vector<TextSequence> sequences;
  std::vector<Warning> warnings;
};

std::string make_sequence_id(std::string_view report_id, std::size_t ordinal);

/// Splits body blocks into sequences of at most `max_tokens` words. Sentences
/// longer than the limit are hard-split into consecutive chunks with a
/// warning. Sequences never cross block boundaries; ordinals start at 0.
Segmentation segment(std::span<const LayoutBlock> blocks, const SegmentationConfig& config = {});

// ---------------------------------------------------------------------------
// Corpus statistics

struct CategoryStats {
  ReportCategory category = ReportCategory::Annual;
  std::size_t reports = 0;
  double mean_pages = 0;
  double mean_sequences = 0;  // post-filtering sequences
};

struct RegionSizeTable {
  std::array<std::array<std::size_t, 3>, 5> counts{};

  std::size_t& at(Region r, SizeClass s) {
    return counts[static_cast<std::size_t>(r)][static_cast<std::size_t>(s)];
  }
  std::size_t at(Region r, SizeClass s) const {
    return counts[static_cast<std::size_t>(r)][static_cast<std::size_t>(s)];
  }
  std::size_t row_total(Region r) const;
  std::size_t column_total(SizeClass s) const;
  std::size_t total() const;
};

struct CorpusStats {
  std::vector<CategoryStats> categories;  // all seven categories, enum order
  std::size_t total_reports = 0;
  double mean_pages = 0;
  double mean_sequences = 0;
  RegionSizeTable banks;
};

CorpusStats corpus_stats(std::span<const ReportDocument> reports,
                         const std::map<std::string, std::size_t>& sequences_per_report,
                         std::span<const BankRecord> banks);

}  // namespace tcfd
