#include "tcfd/evaluation.hpp"

#include <algorithm>

namespace tcfd {

void validate_gold(const GoldSet& gold, const LabelSet& labels) {
  if (gold.taxonomy_version != labels.version()) {
    throw ConfigError("gold file taxonomy version '" + gold.taxonomy_version +
                      "' does not match active taxonomy '" + labels.version() + "'");
  }
  if (gold.annotations.empty()) throw ConfigError("gold set is empty");
  std::set<std::string> ids;
  for (const GoldAnnotation& a : gold.annotations) {
    if (!ids.insert(a.sentence_id).second) {
      throw ConfigError("duplicate gold sentence id '" + a.sentence_id + "'");
    }
    if (a.gold_labels.empty()) throw ConfigError("gold sentence '" + a.sentence_id + "' has no labels");
    for (const std::string& code : a.gold_labels) {
      if (!labels.contains(code)) {
        throw ConfigError("gold sentence '" + a.sentence_id + "' uses unknown label '" + code + "'");
      }
    }
  }
}

Predictions binarize(std::span<const ProbabilityRow> probabilities, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw ConfigError("threshold must lie in (0, 1), got " + std::to_string(threshold));
  }
  Predictions out;
  for (const ProbabilityRow& r : probabilities) {
    auto& set = out[r.sequence_id];
    if (r.p >= threshold) set.insert(r.label_code);
  }
  return out;
}

LabelScores scores_from_counts(std::string label_code, std::size_t tp, std::size_t fp, std::size_t fn) {
  LabelScores s;
  s.label_code = std::move(label_code);
  s.true_positives = tp;
  s.false_positives = fp;
  s.false_negatives = fn;
  s.support = tp + fn;
  const auto ratio = [](std::size_t num, std::size_t den, bool& degenerate) {
    degenerate = den == 0;
    return degenerate ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  s.precision = ratio(tp, tp + fp, s.precision_degenerate);
  s.recall = ratio(tp, tp + fn, s.recall_degenerate);
  const double denom = s.precision + s.recall;
  s.f1_degenerate = denom == 0.0;
  s.f1 = s.f1_degenerate ? 0.0 : 2.0 * s.precision * s.recall / denom;
  return s;
}

LabelScores prf(std::span<const GoldAnnotation> gold, const Predictions& predictions,
                const std::string& label_code) {
  std::vector<std::string> mismatched;
  std::set<std::string> gold_ids;
  for (const GoldAnnotation& a : gold) {
    gold_ids.insert(a.sentence_id);
    if (!predictions.contains(a.sentence_id)) mismatched.push_back(a.sentence_id);
  }
  for (const auto& [id, codes] : predictions) {
    if (!gold_ids.contains(id)) mismatched.push_back(id);
  }
  if (!mismatched.empty()) {
    throw ReferentialError("gold and predictions cover different sentence ids", mismatched);
  }
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const GoldAnnotation& a : gold) {
    const bool is_gold = a.gold_labels.contains(label_code);
    const bool predicted = predictions.at(a.sentence_id).contains(label_code);
    tp += is_gold && predicted;
    fp += !is_gold && predicted;
    fn += is_gold && !predicted;
  }
  return scores_from_counts(label_code, tp, fp, fn);
}

OverallF1 aggregate_f1(std::span<const LabelScores> rows) {
  if (rows.empty()) throw MissingDataError("no per-label scores to aggregate");
  std::size_t tp = 0, fp = 0, fn = 0, support = 0;
  double f1_sum = 0, weighted_sum = 0;
  for (const LabelScores& r : rows) {
    tp += r.true_positives;
    fp += r.false_positives;
    fn += r.false_negatives;
    support += r.support;
    f1_sum += r.f1;
    weighted_sum += r.f1 * static_cast<double>(r.support);
  }
  OverallF1 out;
  out.micro = scores_from_counts("", tp, fp, fn).f1;
  out.macro = f1_sum / static_cast<double>(rows.size());
  out.weighted = support == 0 ? 0.0 : weighted_sum / static_cast<double>(support);
  return out;
}

std::vector<std::string> evaluated_labels(const LabelSet& labels, bool include_none) {
  std::vector<std::string> out;
  const bool has_fine = labels.count(Granularity::Fine) > 0;
  for (const Label& l : labels) {
    if (l.code == kNoneCode) continue;
    if (!has_fine || l.granularity == Granularity::Fine) out.push_back(l.code);
  }
  if (include_none && labels.contains(kNoneCode)) out.emplace_back(kNoneCode);
  return out;
}

EvaluationReport evaluate(const GoldSet& gold, const ProbabilityTable& probabilities,
                          const LabelSet& labels, double threshold, bool include_none) {
  validate_gold(gold, labels);
  if (!probabilities.provenance.taxonomy_version.empty() &&
      probabilities.provenance.taxonomy_version != labels.version()) {
    throw ConfigError("probability table was scored with taxonomy '" +
                      probabilities.provenance.taxonomy_version + "', expected '" + labels.version() + "'");
  }
  const Predictions predictions = binarize(probabilities.rows, threshold);
  EvaluationReport report;
  report.threshold = threshold;
  report.backend = probabilities.provenance.backend;
  report.include_none = include_none;
  for (const std::string& code : evaluated_labels(labels, include_none)) {
    report.labels.push_back(prf(gold.annotations, predictions, code));
  }
  report.overall = aggregate_f1(report.labels);
  return report;
}

double ProbabilityMatrix::at(const std::string& row, const std::string& column) const {
  const auto r = std::find(row_codes.begin(), row_codes.end(), row);
  const auto c = std::find(column_codes.begin(), column_codes.end(), column);
  if (r == row_codes.end() || c == column_codes.end()) {
    throw MissingDataError("no matrix cell (" + row + ", " + column + ")");
  }
  return at(static_cast<std::size_t>(r - row_codes.begin()), static_cast<std::size_t>(c - column_codes.begin()));
}

ProbabilityMatrix probability_matrix(std::span<const GoldAnnotation> gold,
                                     std::span<const ProbabilityRow> probabilities,
                                     const LabelSet& labels) {
  std::vector<std::string> groups;
  for (const Label& l : labels) {
    const bool used = std::any_of(gold.begin(), gold.end(), [&](const GoldAnnotation& a) {
      return a.gold_labels.contains(l.code);
    });
    if (used) groups.push_back(l.code);
  }
  return probability_matrix(gold, probabilities, labels, groups);
}

ProbabilityMatrix probability_matrix(std::span<const GoldAnnotation> gold,
                                     std::span<const ProbabilityRow> probabilities,
                                     const LabelSet& labels,
                                     std::span<const std::string> group_codes) {
  std::map<std::pair<std::string, std::string>, double> p;  // (sentence, label) -> p
  for (const ProbabilityRow& r : probabilities) p[{r.sequence_id, r.label_code}] = r.p;

  ProbabilityMatrix m;
  for (const Label& l : labels) m.row_codes.push_back(l.code);
  m.column_codes.assign(group_codes.begin(), group_codes.end());
  m.values.assign(m.row_codes.size() * m.column_codes.size(), 0.0);

  std::vector<std::string> missing;
  for (std::size_t c = 0; c < m.column_codes.size(); ++c) {
    std::vector<const GoldAnnotation*> members;
    for (const GoldAnnotation& a : gold) {
      if (a.gold_labels.contains(m.column_codes[c])) members.push_back(&a);
    }
    if (members.empty()) throw MissingDataError("gold group '" + m.column_codes[c] + "' is empty");
    m.column_sizes.push_back(members.size());
    for (std::size_t r = 0; r < m.row_codes.size(); ++r) {
      std::vector<double> values;
      for (const GoldAnnotation* a : members) {
        auto it = p.find({a->sentence_id, m.row_codes[r]});
        if (it == p.end()) {
          missing.push_back(a->sentence_id + "/" + m.row_codes[r]);
          continue;
        }
        values.push_back(it->second);
      }
      std::sort(values.begin(), values.end());
      double sum = 0;
      for (double v : values) sum += v;
      m.values[r * m.column_codes.size() + c] = values.empty() ? 0.0 : sum / static_cast<double>(values.size());
    }
  }
  if (!missing.empty()) {
    throw ReferentialError("gold sentences without a probability for every label", missing);
  }
  return m;
}

}  // namespace tcfd
