#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tcfd/nli.hpp"
#include "tcfd/taxonomy.hpp"

namespace tcfd {

struct GoldAnnotation {
  std::string sentence_id;
  std::string text;
  std::set<std::string> gold_labels;  // may hold several codes, or just NONE
};

struct GoldSet {
  std::string taxonomy_version;
  std::vector<GoldAnnotation> annotations;
};

/// Throws ConfigError on empty gold sets, unknown codes, duplicate ids or a
/// taxonomy version that differs from `labels`.
void validate_gold(const GoldSet& gold, const LabelSet& labels);

/// sentence id -> predicted codes. Every sentence present in the input
/// appears, possibly with an empty set.
using Predictions = std::map<std::string, std::set<std::string>>;

/// A label is predicted iff p >= threshold. NONE is treated like any other
/// label. Throws ConfigError unless 0 < threshold < 1.
Predictions binarize(std::span<const ProbabilityRow> probabilities, double threshold);

struct LabelScores {
  std::string label_code;
  std::size_t support = 0;  // gold positives
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  // Set when a zero denominator forced the value to 0.
  bool precision_degenerate = false;
  bool recall_degenerate = false;
  bool f1_degenerate = false;
};

/// Counts TP/FP/FN over sentence-label pairs. Throws ReferentialError when
/// gold and predictions do not cover the same sentence ids.
LabelScores prf(std::span<const GoldAnnotation> gold, const Predictions& predictions,
                const std::string& label_code);

/// Precision/recall/F1 from raw counts with the zero-denominator convention.
LabelScores scores_from_counts(std::string label_code, std::size_t tp, std::size_t fp, std::size_t fn);

struct OverallF1 {
  double micro = 0;
  double macro = 0;
  double weighted = 0;
};

/// micro: pooled counts; macro: mean of per-label f1; weighted: mean
/// weighted by support. MissingDataError on empty input.
OverallF1 aggregate_f1(std::span<const LabelScores> rows);

struct EvaluationReport {
  std::vector<LabelScores> labels;
  OverallF1 overall;
  double threshold = 0.5;
  std::string backend;
  bool include_none = false;
};

/// Labels scored by evaluate(): Fine labels of the set (every non-NONE label
/// when the set has none), plus NONE when requested.
std::vector<std::string> evaluated_labels(const LabelSet& labels, bool include_none);

EvaluationReport evaluate(const GoldSet& gold, const ProbabilityTable& probabilities,
                          const LabelSet& labels, double threshold, bool include_none = false);

/// Mean probability per (scored label, gold group). Rows follow LabelSet
/// order; columns are gold groups, also in LabelSet order.
struct ProbabilityMatrix {
  std::vector<std::string> row_codes;
  std::vector<std::string> column_codes;
  std::vector<std::size_t> column_sizes;
  std::vector<double> values;  // row-major

  double at(std::size_t row, std::size_t column) const { return values[row * column_codes.size() + column]; }
  double at(const std::string& row, const std::string& column) const;
};

/// Columns for every label that has at least one gold sentence.
ProbabilityMatrix probability_matrix(std::span<const GoldAnnotation> gold,
                                     std::span<const ProbabilityRow> probabilities,
                                     const LabelSet& labels);

/// Explicit gold groups; MissingDataError if one has no sentences.
ProbabilityMatrix probability_matrix(std::span<const GoldAnnotation> gold,
                                     std::span<const ProbabilityRow> probabilities,
                                     const LabelSet& labels,
                                     std::span<const std::string> group_codes);

}  // namespace tcfd
