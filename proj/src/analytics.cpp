#include "tcfd/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tcfd {
namespace {

// Sum in ascending order so the result does not depend on input order.
double order_free_mean(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  double sum = 0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

bool needs_report(GroupKey k) { return k != GroupKey::LabelCode; }
bool needs_bank(GroupKey k) { return k == GroupKey::Region || k == GroupKey::SizeClass; }

}  // namespace

std::string_view to_string(GroupKey k) {
  switch (k) {
    case GroupKey::FinancialYear: return "financial_year";
    case GroupKey::LabelCode: return "label_code";
    case GroupKey::ReportCategory: return "report_category";
    case GroupKey::Region: return "region";
    case GroupKey::SizeClass: return "size_class";
  }
  return "";
}

GroupKey parse_group_key(std::string_view s) {
  for (GroupKey k : {GroupKey::FinancialYear, GroupKey::LabelCode, GroupKey::ReportCategory,
                     GroupKey::Region, GroupKey::SizeClass}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("unknown group key '" + std::string(s) + "'");
}

ReportIndex::ReportIndex(std::span<const ReportDocument> reports, std::span<const BankRecord> banks) {
  for (const auto& r : reports) reports_.emplace(r.report_id, r);
  for (const auto& b : banks) banks_.emplace(b.bank_id, b);
}

const ReportDocument* ReportIndex::report(const std::string& id) const {
  auto it = reports_.find(id);
  return it == reports_.end() ? nullptr : &it->second;
}

const BankRecord* ReportIndex::bank(const std::string& id) const {
  auto it = banks_.find(id);
  return it == banks_.end() ? nullptr : &it->second;
}

std::vector<AggregateRow> mean_by(std::span<const ProbabilityRow> table, const ReportIndex& index,
                                  std::span<const GroupKey> keys, Weighting weighting) {
  const bool join_report = weighting == Weighting::Report ||
                           std::any_of(keys.begin(), keys.end(), needs_report);
  const bool join_bank = std::any_of(keys.begin(), keys.end(), needs_bank);

  std::map<std::vector<KeyValue>, std::map<std::string, std::vector<double>>> groups;
  std::vector<std::string> offenders;
  for (const ProbabilityRow& row : table) {
    const ReportDocument* report = join_report ? index.report(row.report_id) : nullptr;
    const BankRecord* bank = join_bank && report ? index.bank(report->bank_id) : nullptr;
    if ((join_report && !report) || (join_bank && !bank)) {
      if (offenders.empty() || offenders.back() != row.sequence_id) offenders.push_back(row.sequence_id);
      continue;
    }
    std::vector<KeyValue> kv;
    kv.reserve(keys.size());
    for (GroupKey k : keys) {
      switch (k) {
        case GroupKey::FinancialYear:
          kv.push_back({k, report->financial_year, std::to_string(report->financial_year)});
          break;
        case GroupKey::LabelCode:
          kv.push_back({k, 0, row.label_code});
          break;
        case GroupKey::ReportCategory:
          kv.push_back({k, static_cast<long>(report->category), std::string(to_string(report->category))});
          break;
        case GroupKey::Region:
          kv.push_back({k, static_cast<long>(bank->region), std::string(to_string(bank->region))});
          break;
        case GroupKey::SizeClass: {
          const SizeClass s = bank->size_class();
          kv.push_back({k, static_cast<long>(s), std::string(to_string(s))});
          break;
        }
      }
    }
    const std::string unit = weighting == Weighting::Report ? row.report_id : std::string();
    groups[std::move(kv)][unit].push_back(row.p);
  }
  if (!offenders.empty()) {
    offenders.erase(std::unique(offenders.begin(), offenders.end()), offenders.end());
    throw ReferentialError("probability rows do not join to report/bank metadata", offenders);
  }

  std::vector<AggregateRow> out;
  out.reserve(groups.size());
  for (auto& [kv, units] : groups) {
    AggregateRow row{kv, 0, 0.0};
    std::vector<double> unit_means;
    for (auto& [unit, values] : units) {
      row.n += values.size();
      unit_means.push_back(order_free_mean(values));
    }
    if (weighting == Weighting::Sequence) {
      row.mean = unit_means.front();
    } else {
      row.mean = order_free_mean(unit_means);
    }
    out.push_back(std::move(row));
  }
  return out;
}

YearlySeries yearly_means(std::span<const ProbabilityRow> table, const ReportIndex& index,
                          const std::string& label_code) {
  std::vector<ProbabilityRow> rows;
  std::copy_if(table.begin(), table.end(), std::back_inserter(rows),
               [&](const ProbabilityRow& r) { return r.label_code == label_code; });
  const GroupKey keys[] = {GroupKey::FinancialYear};
  YearlySeries series;
  for (const AggregateRow& r : mean_by(rows, index, keys)) {
    series[static_cast<int>(r.keys[0].ordinal)] = r.mean;
  }
  return series;
}

double growth(const YearlySeries& series, int y0, int y1) {
  const auto a = series.find(y0);
  const auto b = series.find(y1);
  if (a == series.end()) throw MissingDataError("no mean for year " + std::to_string(y0));
  if (b == series.end()) throw MissingDataError("no mean for year " + std::to_string(y1));
  if (a->second == 0.0) throw DomainError("growth undefined: base-year mean is zero");
  return (b->second - a->second) / a->second;
}

double quantile(std::span<const double> values, double q) {
  if (values.empty()) throw MissingDataError("quantile of an empty sample");
  std::vector<double> v(values.begin(), values.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(lo), v.end());
  const double below = v[lo];
  if (frac == 0.0 || lo + 1 >= v.size()) return below;
  const double above = *std::min_element(v.begin() + static_cast<std::ptrdiff_t>(lo) + 1, v.end());
  return below + frac * (above - below);
}

DistributionStats distribution_of(std::span<const double> values, std::string label_code) {
  if (values.empty()) throw MissingDataError("no probabilities for label '" + label_code + "'");
  DistributionStats d;
  d.label_code = std::move(label_code);
  d.n = values.size();
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  d.min = *mn;
  d.max = *mx;
  d.q1 = quantile(values, 0.25);
  d.median = quantile(values, 0.5);
  d.q3 = quantile(values, 0.75);
  std::vector<double> copy(values.begin(), values.end());
  d.mean = order_free_mean(copy);
  const double iqr = d.q3 - d.q1;
  d.lower_fence = d.q1 - 1.5 * iqr;
  d.upper_fence = d.q3 + 1.5 * iqr;
  d.lower_whisker = d.max;
  d.upper_whisker = d.min;
  for (double v : values) {
    if (v >= d.lower_fence) d.lower_whisker = std::min(d.lower_whisker, v);
    if (v <= d.upper_fence) d.upper_whisker = std::max(d.upper_whisker, v);
  }
  return d;
}

DistributionStats distribution(std::span<const ProbabilityRow> table, const std::string& label_code) {
  std::vector<double> values;
  for (const ProbabilityRow& r : table) {
    if (r.label_code == label_code) values.push_back(r.p);
  }
  return distribution_of(values, label_code);
}

std::vector<TrendPoint> trend_series(std::span<const ProbabilityRow> table, const ReportIndex& index,
                                     const std::string& general_code, const std::string& climate_code) {
  const YearlySeries general = yearly_means(table, index, general_code);
  const YearlySeries climate = yearly_means(table, index, climate_code);
  if (general.empty()) throw MissingDataError("no probabilities for label '" + general_code + "'");
  if (climate.empty()) throw MissingDataError("no probabilities for label '" + climate_code + "'");
  std::map<int, TrendPoint> points;
  for (const auto& [year, mean] : general) {
    points[year].year = year;
    points[year].general = mean;
  }
  for (const auto& [year, mean] : climate) {
    points[year].year = year;
    points[year].climate = mean;
  }
  std::vector<TrendPoint> out;
  for (auto& [year, p] : points) out.push_back(p);
  return out;
}

}  // namespace tcfd
