#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tcfd/analytics.hpp"
#include "tcfd/corpus.hpp"
#include "tcfd/evaluation.hpp"
#include "tcfd/nli.hpp"
#include "tcfd/taxonomy.hpp"

// Every tabular file is tab-separated with one header row; lines starting
// with '#' carry "key: value" metadata. Free-text records (layout blocks,
// sequences) are JSON Lines.
namespace tcfd::io {

std::string read_text(const std::filesystem::path& path);
std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
/// Writes atomically enough for our purposes: parent directories are created.
void write_text(const std::filesystem::path& path, std::string_view content);

struct Tsv {
  std::map<std::string, std::string> meta;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column(std::string_view name) const;
  std::size_t require_column(std::string_view name) const;
};

Tsv parse_tsv(std::string_view text);

class TsvWriter {
 public:
  void meta(std::string_view key, std::string_view value);
  void header(std::initializer_list<std::string_view> cols);
  void header(const std::vector<std::string>& cols);
  void row(const std::vector<std::string>& cells);
  const std::string& str() const { return out_; }

 private:
  std::string out_;
};

std::string fixed(double v, int decimals);
std::string full_precision(double v);

LabelSet parse_label_set(std::string_view text);
std::string format_label_set(const LabelSet& set);

/// Relative file paths are resolved against `base_dir`.
std::vector<ReportDocument> parse_manifest(std::string_view text, const std::filesystem::path& base_dir = {});
std::vector<BankRecord> parse_registry(std::string_view text);
std::string format_registry(std::span<const BankRecord> banks);

/// Report metadata after ingest (manifest columns plus page and sequence
/// counts). Readable again with parse_manifest.
std::string format_reports(std::span<const ReportDocument> reports,
                           const std::map<std::string, std::size_t>& sequences_per_report);

std::vector<LayoutBlock> parse_blocks(std::string_view jsonl);
std::string format_blocks(std::span<const LayoutBlock> blocks);

std::vector<TextSequence> parse_sequences(std::string_view jsonl);
std::string format_sequences(std::span<const TextSequence> sequences);

ProbabilityTable parse_probability_table(std::string_view text);
std::string format_probability_table(const ProbabilityTable& table);

GoldSet parse_gold(std::string_view text);
std::string format_gold(const GoldSet& gold);

std::string format_corpus_stats(const CorpusStats& stats);
std::string format_bank_crosstab(const RegionSizeTable& table);

std::string format_aggregate(std::span<const GroupKey> keys, std::span<const AggregateRow> rows);
/// Label x year grid of two-decimal means, rows in the given order.
std::string format_year_pivot(std::span<const std::string> label_codes,
                              const std::map<std::string, YearlySeries>& series);
std::string format_trend(const std::string& general, const std::string& climate,
                         std::span<const TrendPoint> points);
std::string format_boxplots(std::span<const DistributionStats> stats);

/// Recall/Precision/F1 rows by label columns.
std::string format_evaluation_table(const EvaluationReport& report);
std::string format_evaluation_per_label(const EvaluationReport& report);
std::string format_evaluation_summary(const EvaluationReport& report);
std::string format_matrix(const ProbabilityMatrix& matrix);

std::string format_warnings(std::span<const Warning> warnings);

}  // namespace tcfd::io
