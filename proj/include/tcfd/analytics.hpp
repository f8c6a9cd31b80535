#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tcfd/corpus.hpp"
#include "tcfd/nli.hpp"

namespace tcfd {

enum class GroupKey { FinancialYear, LabelCode, ReportCategory, Region, SizeClass };

std::string_view to_string(GroupKey k);
GroupKey parse_group_key(std::string_view s);

/// Report and issuer metadata needed to join probability rows to group keys.
class ReportIndex {
 public:
  ReportIndex() = default;
  ReportIndex(std::span<const ReportDocument> reports, std::span<const BankRecord> banks);

  const ReportDocument* report(const std::string& report_id) const;
  const BankRecord* bank(const std::string& bank_id) const;

 private:
  std::map<std::string, ReportDocument, std::less<>> reports_;
  std::map<std::string, BankRecord, std::less<>> banks_;
};

/// One group value. Year keys sort numerically, enum keys in declaration
/// order, label codes lexicographically.
struct KeyValue {
  GroupKey key;
  long ordinal = 0;  // sort position for year/enum keys
  std::string text;

  bool operator==(const KeyValue& o) const { return key == o.key && ordinal == o.ordinal && text == o.text; }
  bool operator<(const KeyValue& o) const {
    if (ordinal != o.ordinal) return ordinal < o.ordinal;
    return text < o.text;
  }
};

struct AggregateRow {
  std::vector<KeyValue> keys;
  std::size_t n = 0;
  double mean = 0;
};

enum class Weighting { Sequence, Report };

/// Arithmetic mean of p per group, rows sorted by key tuple. With
/// Weighting::Report every report contributes its own mean once. Groups
/// without data are omitted. Throws ReferentialError when rows cannot be
/// joined to report/bank metadata required by `keys`.
std::vector<AggregateRow> mean_by(std::span<const ProbabilityRow> table, const ReportIndex& index,
                                  std::span<const GroupKey> keys,
                                  Weighting weighting = Weighting::Sequence);

/// Yearly mean series of one label.
using YearlySeries = std::map<int, double>;

YearlySeries yearly_means(std::span<const ProbabilityRow> table, const ReportIndex& index,
                          const std::string& label_code);

/// Relative change (mean(y1) - mean(y0)) / mean(y0) as a fraction.
/// MissingDataError if a year is absent, DomainError if mean(y0) is 0.
double growth(const YearlySeries& series, int y0, int y1);

struct DistributionStats {
  std::string label_code;
  std::size_t n = 0;
  double min = 0;
  double q1 = 0;
  double median = 0;
  double q3 = 0;
  double max = 0;
  double mean = 0;
  // 1.5 IQR fences and the most extreme observations inside them.
  double lower_fence = 0;
  double upper_fence = 0;
  double lower_whisker = 0;
  double upper_whisker = 0;
};

/// Quantile of a sample by linear interpolation between order statistics at
/// position q * (n - 1). Input need not be sorted.
double quantile(std::span<const double> values, double q);

DistributionStats distribution_of(std::span<const double> values, std::string label_code = {});

/// Box-plot statistics of one label's probabilities. MissingDataError when
/// the label has no rows.
DistributionStats distribution(std::span<const ProbabilityRow> table, const std::string& label_code);

struct TrendPoint {
  int year = 0;
  std::optional<double> general;
  std::optional<double> climate;
};

/// Yearly means of a general label and its climate-related counterpart,
/// aligned on year. MissingDataError if either label has no rows.
std::vector<TrendPoint> trend_series(std::span<const ProbabilityRow> table, const ReportIndex& index,
                                     const std::string& general_code, const std::string& climate_code);

}  // namespace tcfd
