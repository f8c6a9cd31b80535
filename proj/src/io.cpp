#include "tcfd/io.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "json.hpp"
#include "tcfd/text.hpp"

namespace tcfd::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto at = s.find(sep, start);
    out.emplace_back(s.substr(start, at == std::string_view::npos ? std::string_view::npos : at - start));
    if (at == std::string_view::npos) break;
    start = at + 1;
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string clean_cell(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

template <typename F>
void for_each_line(std::string_view text, F&& f) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    f(line, ++line_no);
    start = end + 1;
  }
}

long parse_long(const std::string& s, std::string_view what) {
  try {
    std::size_t used = 0;
    const long v = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("invalid " + std::string(what) + " '" + s + "'");
  }
}

double parse_double(const std::string& s, std::string_view what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("invalid " + std::string(what) + " '" + s + "'");
  }
}

std::string meta_or(const Tsv& t, const std::string& key, std::string fallback = {}) {
  auto it = t.meta.find(key);
  return it == t.meta.end() ? fallback : it->second;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_text(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::optional<std::size_t> Tsv::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t Tsv::require_column(std::string_view name) const {
  if (auto c = column(name)) return *c;
  throw ParseError("missing column '" + std::string(name) + "'");
}

Tsv parse_tsv(std::string_view text) {
  Tsv t;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    if (line.empty()) return;
    if (line.front() == '#') {
      const auto colon = line.find(':');
      if (colon != std::string_view::npos) {
        t.meta[trim(line.substr(1, colon - 1))] = trim(line.substr(colon + 1));
      }
      return;
    }
    if (t.header.empty()) {
      t.header = split(line, '\t');
      for (auto& h : t.header) h = trim(h);
      return;
    }
    auto cells = split(line, '\t');
    if (cells.size() < t.header.size()) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(t.header.size()) + " columns, got " + std::to_string(cells.size()));
    }
    // Surplus cells belong to the last (free-text) column.
    while (cells.size() > t.header.size()) {
      cells[cells.size() - 2] += ' ' + cells.back();
      cells.pop_back();
    }
    t.rows.push_back(std::move(cells));
  });
  return t;
}

void TsvWriter::meta(std::string_view key, std::string_view value) {
  out_ += "# ";
  out_ += key;
  out_ += ": ";
  out_ += clean_cell(value);
  out_ += '\n';
}

void TsvWriter::header(std::initializer_list<std::string_view> cols) {
  header(std::vector<std::string>(cols.begin(), cols.end()));
}

void TsvWriter::header(const std::vector<std::string>& cols) { row(cols); }

void TsvWriter::row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ += '\t';
    out_ += clean_cell(cells[i]);
  }
  out_ += '\n';
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string full_precision(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Labels

LabelSet parse_label_set(std::string_view text) {
  const Tsv t = parse_tsv(text);
  const auto code = t.require_column("code");
  const auto pillar = t.require_column("pillar");
  const auto gran = t.require_column("granularity");
  const auto desc = t.require_column("description");
  std::vector<Label> labels;
  for (const auto& r : t.rows) {
    labels.push_back({trim(r[code]), parse_pillar(trim(r[pillar])), parse_granularity(trim(r[gran])),
                      trim(r[desc])});
  }
  std::string version = meta_or(t, "version");
  if (version.empty()) version = "custom-" + text::fnv1a_hex(text);
  return LabelSet(std::move(labels), version);
}

std::string format_label_set(const LabelSet& set) {
  TsvWriter w;
  w.meta("version", set.version());
  w.header({"code", "pillar", "granularity", "description"});
  for (const Label& l : set) {
    w.row({l.code, std::string(to_string(l.pillar)), std::string(to_string(l.granularity)), l.description});
  }
  return w.str();
}

// ---------------------------------------------------------------------------
// Manifest and registry

std::vector<ReportDocument> parse_manifest(std::string_view text, const fs::path& base_dir) {
  const Tsv t = parse_tsv(text);
  const auto id = t.require_column("report_id");
  const auto bank = t.require_column("bank_id");
  const auto cat = t.require_column("category");
  const auto year = t.require_column("financial_year");
  const auto path = t.column("path");
  const auto pages = t.column("page_count");
  std::vector<ReportDocument> out;
  for (const auto& r : t.rows) {
    ReportDocument d;
    d.report_id = trim(r[id]);
    d.bank_id = trim(r[bank]);
    d.category = parse_report_category(trim(r[cat]));
    d.financial_year = static_cast<int>(parse_long(trim(r[year]), "financial_year"));
    if (pages && !trim(r[*pages]).empty()) {
      d.page_count = static_cast<std::size_t>(parse_long(trim(r[*pages]), "page_count"));
    }
    if (path) {
      d.path = trim(r[*path]);
      if (!d.path.empty() && fs::path(d.path).is_relative() && !base_dir.empty()) {
        d.path = (base_dir / d.path).lexically_normal().string();
      }
    }
    if (d.report_id.empty()) throw ParseError("manifest row without report_id");
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<BankRecord> parse_registry(std::string_view text) {
  const Tsv t = parse_tsv(text);
  const auto id = t.require_column("bank_id");
  const auto name = t.require_column("name");
  const auto region = t.require_column("region");
  const auto assets = t.require_column("total_assets_usd");
  std::vector<BankRecord> out;
  for (const auto& r : t.rows) {
    BankRecord b{trim(r[id]), trim(r[name]), parse_region(trim(r[region])),
                 parse_double(trim(r[assets]), "total_assets_usd")};
    (void)b.size_class();  // validates the amount
    out.push_back(std::move(b));
  }
  return out;
}

std::string format_registry(std::span<const BankRecord> banks) {
  TsvWriter w;
  w.header({"bank_id", "name", "region", "total_assets_usd"});
  for (const BankRecord& b : banks) {
    w.row({b.bank_id, b.name, std::string(to_string(b.region)), full_precision(b.total_assets_usd)});
  }
  return w.str();
}

std::string format_reports(std::span<const ReportDocument> reports,
                           const std::map<std::string, std::size_t>& sequences_per_report) {
  TsvWriter w;
  w.header({"report_id", "bank_id", "category", "financial_year", "page_count", "sequence_count", "path"});
  for (const ReportDocument& r : reports) {
    const auto it = sequences_per_report.find(r.report_id);
    w.row({r.report_id, r.bank_id, std::string(to_string(r.category)), std::to_string(r.financial_year),
           std::to_string(r.page_count), std::to_string(it == sequences_per_report.end() ? 0 : it->second),
           r.path});
  }
  return w.str();
}

// ---------------------------------------------------------------------------
// JSON Lines

std::vector<LayoutBlock> parse_blocks(std::string_view jsonl) {
  std::vector<LayoutBlock> out;
  for_each_line(jsonl, [&](std::string_view line, std::size_t line_no) {
    if (trim(line).empty()) return;
    try {
      const json j = json::parse(line);
      LayoutBlock b;
      b.report_id = j.at("report_id").get<std::string>();
      b.block_index = j.at("block_index").get<std::size_t>();
      b.page = j.at("page").get<std::size_t>();
      b.tag = parse_block_tag(j.at("tag").get<std::string>());
      b.text = j.at("text").get<std::string>();
      out.push_back(std::move(b));
    } catch (const json::exception& e) {
      throw ParseError("blocks line " + std::to_string(line_no) + ": " + e.what());
    }
  });
  return out;
}

std::string format_blocks(std::span<const LayoutBlock> blocks) {
  std::string out;
  for (const LayoutBlock& b : blocks) {
    json j;
    j["report_id"] = b.report_id;
    j["block_index"] = b.block_index;
    j["page"] = b.page;
    j["tag"] = std::string(to_string(b.tag));
    j["text"] = b.text;
    out += j.dump() + '\n';
  }
  return out;
}

std::vector<TextSequence> parse_sequences(std::string_view jsonl) {
  std::vector<TextSequence> out;
  for_each_line(jsonl, [&](std::string_view line, std::size_t line_no) {
    if (trim(line).empty()) return;
    try {
      const json j = json::parse(line);
      TextSequence s;
      s.sequence_id = j.at("sequence_id").get<std::string>();
      s.report_id = j.at("report_id").get<std::string>();
      s.ordinal = j.at("ordinal").get<std::size_t>();
      s.text = j.at("text").get<std::string>();
      s.token_count = j.at("token_count").get<std::size_t>();
      out.push_back(std::move(s));
    } catch (const json::exception& e) {
      throw ParseError("sequences line " + std::to_string(line_no) + ": " + e.what());
    }
  });
  return out;
}

std::string format_sequences(std::span<const TextSequence> sequences) {
  std::string out;
  for (const TextSequence& s : sequences) {
    json j;
    j["sequence_id"] = s.sequence_id;
    j["report_id"] = s.report_id;
    j["ordinal"] = s.ordinal;
    j["text"] = s.text;
    j["token_count"] = s.token_count;
    out += j.dump() + '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Probability table

ProbabilityTable parse_probability_table(std::string_view text) {
  const Tsv t = parse_tsv(text);
  ProbabilityTable table;
  table.provenance.backend = meta_or(t, "backend");
  table.provenance.template_text = meta_or(t, "template");
  table.provenance.general_template = meta_or(t, "general-template");
  table.provenance.template_hash = meta_or(t, "template-hash");
  table.provenance.taxonomy_version = meta_or(t, "taxonomy-version");
  if (t.header.empty()) return table;
  const auto seq = t.require_column("sequence_id");
  const auto rep = t.require_column("report_id");
  const auto label = t.require_column("label_code");
  const auto p = t.require_column("p");
  for (const auto& r : t.rows) {
    const double v = parse_double(trim(r[p]), "probability");
    if (!(v >= 0.0 && v <= 1.0)) throw ParseError("probability out of [0,1]: " + r[p]);
    table.rows.push_back({trim(r[seq]), trim(r[rep]), trim(r[label]), v});
  }
  return table;
}

std::string format_probability_table(const ProbabilityTable& table) {
  const Provenance& pv = table.provenance;
  TsvWriter w;
  w.meta("backend", pv.backend);
  w.meta("template", pv.template_text);
  if (!pv.general_template.empty()) w.meta("general-template", pv.general_template);
  w.meta("template-hash", pv.template_hash);
  w.meta("taxonomy-version", pv.taxonomy_version);
  w.header({"sequence_id", "report_id", "label_code", "p", "backend", "template_hash"});
  for (const ProbabilityRow& r : table.rows) {
    w.row({r.sequence_id, r.report_id, r.label_code, fixed(r.p, 6), pv.backend, pv.template_hash});
  }
  return w.str();
}

// ---------------------------------------------------------------------------
// Gold annotations

GoldSet parse_gold(std::string_view text) {
  const Tsv t = parse_tsv(text);
  GoldSet gold;
  gold.taxonomy_version = meta_or(t, "taxonomy-version");
  if (gold.taxonomy_version.empty()) throw ParseError("gold file lacks a '# taxonomy-version:' header");
  const auto id = t.require_column("sentence_id");
  const auto labels = t.require_column("labels");
  const auto txt = t.require_column("text");
  for (const auto& r : t.rows) {
    GoldAnnotation a;
    a.sentence_id = trim(r[id]);
    for (const std::string& code : split(r[labels], ';')) {
      if (!trim(code).empty()) a.gold_labels.insert(trim(code));
    }
    a.text = trim(r[txt]);
    gold.annotations.push_back(std::move(a));
  }
  return gold;
}

std::string format_gold(const GoldSet& gold) {
  TsvWriter w;
  w.meta("taxonomy-version", gold.taxonomy_version);
  w.header({"sentence_id", "labels", "text"});
  for (const GoldAnnotation& a : gold.annotations) {
    std::string codes;
    for (const std::string& c : a.gold_labels) codes += (codes.empty() ? "" : ";") + c;
    w.row({a.sentence_id, codes, a.text});
  }
  return w.str();
}

// ---------------------------------------------------------------------------
// Reports

std::string format_corpus_stats(const CorpusStats& stats) {
  TsvWriter w;
  w.meta("sequence counts", "post-filtering (body content and abstract only)");
  w.header({"category", "reports", "mean_pages", "mean_sequences"});
  for (const CategoryStats& c : stats.categories) {
    w.row({std::string(to_string(c.category)), std::to_string(c.reports), fixed(c.mean_pages, 2),
           fixed(c.mean_sequences, 2)});
  }
  w.row({"ALL", std::to_string(stats.total_reports), fixed(stats.mean_pages, 2), fixed(stats.mean_sequences, 2)});
  return w.str();
}

std::string format_bank_crosstab(const RegionSizeTable& table) {
  TsvWriter w;
  w.header({"region", "Large", "Medium", "Small", "total"});
  for (Region r : kRegions) {
    std::vector<std::string> row{std::string(to_string(r))};
    for (SizeClass s : kSizeClasses) row.push_back(std::to_string(table.at(r, s)));
    row.push_back(std::to_string(table.row_total(r)));
    w.row(row);
  }
  std::vector<std::string> total{"total"};
  for (SizeClass s : kSizeClasses) total.push_back(std::to_string(table.column_total(s)));
  total.push_back(std::to_string(table.total()));
  w.row(total);
  return w.str();
}

std::string format_aggregate(std::span<const GroupKey> keys, std::span<const AggregateRow> rows) {
  TsvWriter w;
  std::vector<std::string> header;
  for (GroupKey k : keys) header.emplace_back(to_string(k));
  for (const char* c : {"n", "mean", "mean_full"}) header.emplace_back(c);
  w.header(header);
  for (const AggregateRow& r : rows) {
    std::vector<std::string> cells;
    for (const KeyValue& kv : r.keys) cells.push_back(kv.text);
    cells.push_back(std::to_string(r.n));
    cells.push_back(fixed(r.mean, 2));
    cells.push_back(full_precision(r.mean));
    w.row(cells);
  }
  return w.str();
}

std::string format_year_pivot(std::span<const std::string> label_codes,
                              const std::map<std::string, YearlySeries>& series) {
  std::set<int> years;
  for (const auto& [code, s] : series) {
    for (const auto& [y, m] : s) years.insert(y);
  }
  TsvWriter w;
  std::vector<std::string> header{"label_code"};
  for (int y : years) header.push_back(std::to_string(y));
  w.header(header);
  for (const std::string& code : label_codes) {
    const auto it = series.find(code);
    if (it == series.end()) continue;
    std::vector<std::string> row{code};
    for (int y : years) {
      const auto m = it->second.find(y);
      row.push_back(m == it->second.end() ? "" : fixed(m->second, 2));
    }
    w.row(row);
  }
  return w.str();
}

std::string format_trend(const std::string& general, const std::string& climate,
                         std::span<const TrendPoint> points) {
  TsvWriter w;
  w.meta("general", general);
  w.meta("climate", climate);
  w.header({"financial_year", "general_mean", "climate_mean"});
  for (const TrendPoint& p : points) {
    w.row({std::to_string(p.year), p.general ? full_precision(*p.general) : "",
           p.climate ? full_precision(*p.climate) : ""});
  }
  return w.str();
}

std::string format_boxplots(std::span<const DistributionStats> stats) {
  TsvWriter w;
  w.meta("quartiles", "linear interpolation at q*(n-1)");
  w.header({"label_code", "n", "min", "q1", "median", "q3", "max", "mean", "lower_fence", "upper_fence",
            "lower_whisker", "upper_whisker"});
  for (const DistributionStats& d : stats) {
    w.row({d.label_code, std::to_string(d.n), full_precision(d.min), full_precision(d.q1),
           full_precision(d.median), full_precision(d.q3), full_precision(d.max), full_precision(d.mean),
           full_precision(d.lower_fence), full_precision(d.upper_fence), full_precision(d.lower_whisker),
           full_precision(d.upper_whisker)});
  }
  return w.str();
}

std::string format_evaluation_table(const EvaluationReport& report) {
  TsvWriter w;
  w.meta("threshold", fixed(report.threshold, 6));
  w.meta("backend", report.backend);
  std::vector<std::string> header{"metric"};
  for (const LabelScores& s : report.labels) header.push_back(s.label_code);
  w.header(header);
  std::vector<std::string> recall{"Recall"}, precision{"Precision"}, f1{"F1-Score"};
  for (const LabelScores& s : report.labels) {
    recall.push_back(fixed(s.recall, 2));
    precision.push_back(fixed(s.precision, 2));
    f1.push_back(fixed(s.f1, 2));
  }
  w.row(recall);
  w.row(precision);
  w.row(f1);
  return w.str();
}

std::string format_evaluation_per_label(const EvaluationReport& report) {
  TsvWriter w;
  w.header({"label_code", "support", "tp", "fp", "fn", "precision", "recall", "f1", "degenerate"});
  for (const LabelScores& s : report.labels) {
    std::string flags;
    if (s.precision_degenerate) flags += "precision;";
    if (s.recall_degenerate) flags += "recall;";
    if (s.f1_degenerate) flags += "f1;";
    if (!flags.empty()) flags.pop_back();
    w.row({s.label_code, std::to_string(s.support), std::to_string(s.true_positives),
           std::to_string(s.false_positives), std::to_string(s.false_negatives), full_precision(s.precision),
           full_precision(s.recall), full_precision(s.f1), flags});
  }
  return w.str();
}

std::string format_evaluation_summary(const EvaluationReport& report) {
  json j;
  j["threshold"] = report.threshold;
  j["backend"] = report.backend;
  j["include_none"] = report.include_none;
  j["labels"] = report.labels.size();
  j["micro_f1"] = report.overall.micro;
  j["macro_f1"] = report.overall.macro;
  j["weighted_f1"] = report.overall.weighted;
  return j.dump(2) + '\n';
}

std::string format_matrix(const ProbabilityMatrix& m) {
  TsvWriter w;
  std::vector<std::string> header{"label_code"};
  header.insert(header.end(), m.column_codes.begin(), m.column_codes.end());
  w.header(header);
  std::vector<std::string> sizes{"n_sentences"};
  for (std::size_t n : m.column_sizes) sizes.push_back(std::to_string(n));
  for (std::size_t r = 0; r < m.row_codes.size(); ++r) {
    std::vector<std::string> row{m.row_codes[r]};
    for (std::size_t c = 0; c < m.column_codes.size(); ++c) row.push_back(fixed(m.at(r, c), 4));
    w.row(row);
  }
  w.row(sizes);
  return w.str();
}

std::string format_warnings(std::span<const Warning> warnings) {
  TsvWriter w;
  w.header({"subject", "message"});
  for (const Warning& x : warnings) w.row({x.subject, x.message});
  return w.str();
}

}  // namespace tcfd::io
