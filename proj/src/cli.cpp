#include "tcfd/cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "tcfd/analytics.hpp"
#include "tcfd/corpus.hpp"
#include "tcfd/evaluation.hpp"
#include "tcfd/io.hpp"
#include "tcfd/model_bundle.hpp"
#include "tcfd/nli.hpp"
#include "tcfd/parallel.hpp"
#include "tcfd/taxonomy.hpp"

namespace tcfd::cli {

namespace fs = std::filesystem;

namespace {

struct ItemError {
  std::string item;
  std::string message;
};

std::string format_errors(std::span<const ItemError> errors) {
  io::TsvWriter w;
  w.header({"item", "message"});
  for (const ItemError& e : errors) w.row({e.item, e.message});
  return w.str();
}

std::string utc_stamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

fs::path make_run_dir(const std::string& out, const std::string& command) {
  if (!out.empty()) {
    fs::create_directories(out);
    return out;
  }
  const fs::path base = fs::path("runs") / (command + "-" + utc_stamp());
  fs::path dir = base;
  for (int i = 1; fs::exists(dir); ++i) dir = base.string() + "-" + std::to_string(i);
  fs::create_directories(dir);
  return dir;
}

/// Mirrors progress lines to stderr and the run's log file.
class RunLog {
 public:
  explicit RunLog(std::ostream& err) : err_(err) {}
  void line(const std::string& s) {
    err_ << s << '\n';
    text_ += s;
    text_ += '\n';
  }
  const std::string& text() const { return text_; }

 private:
  std::ostream& err_;
  std::string text_;
};

LabelSet load_labels(const std::string& path) {
  if (path.empty()) return builtin_taxonomy();
  LabelSet set = io::parse_label_set(io::read_text(path));
  if (auto findings = validate(set); !findings.empty()) {
    throw ConfigError("invalid label file " + path + ": " + findings.front().message);
  }
  return set;
}

void require_version(const LabelSet& labels, const std::string& version, const std::string& what) {
  if (version != labels.version()) {
    throw ConfigError(what + " was produced with taxonomy '" + version + "' but the label set is '" +
                      labels.version() + "'");
  }
}

// ---------------------------------------------------------------------------

struct IngestOptions {
  std::string manifest;
  std::string registry;
  std::string extractor = "heuristic";
  std::string unit = "sentence";
  std::size_t max_tokens = 512;
  std::size_t workers = 1;
};

struct ReportOutcome {
  std::optional<ItemError> error;
  std::size_t page_count = 0;
  std::vector<LayoutBlock> blocks;
  std::vector<TextSequence> sequences;
  std::vector<Warning> warnings;
};

std::unique_ptr<BlockExtractor> make_extractor(const std::string& spec) {
  if (spec == "heuristic") return std::make_unique<HeuristicExtractor>();
  if (spec.starts_with("blocks:")) {
    const std::string path = spec.substr(7);
    return std::make_unique<PretaggedExtractor>(io::parse_blocks(io::read_text(path)),
                                                fs::path(path).filename().string());
  }
  throw ConfigError("unknown extractor '" + spec + "' (expected heuristic or blocks:<file>)");
}

int run_ingest(const IngestOptions& opt, const fs::path& dir, RunLog& log) {
  const fs::path manifest_path(opt.manifest);
  std::vector<ReportDocument> reports =
      io::parse_manifest(io::read_text(manifest_path), manifest_path.parent_path());
  const std::vector<BankRecord> banks = io::parse_registry(io::read_text(opt.registry));
  const auto extractor = make_extractor(opt.extractor);

  SegmentationConfig seg_config;
  seg_config.max_tokens = opt.max_tokens;
  if (opt.unit == "block") {
    seg_config.unit = SegmentationConfig::Unit::Block;
  } else if (opt.unit != "sentence") {
    throw ConfigError("unknown segmentation unit '" + opt.unit + "'");
  }
  if (seg_config.max_tokens == 0) throw ConfigError("max-tokens must be at least 1");

  const ReportIndex index({}, banks);
  std::vector<ReportOutcome> outcomes(reports.size());
  parallel_for(reports.size(), opt.workers, [&](std::size_t i) {
    const ReportDocument& doc = reports[i];
    ReportOutcome& o = outcomes[i];
    try {
      if (!index.bank(doc.bank_id)) throw ConfigError("bank '" + doc.bank_id + "' is not in the registry");
      std::vector<std::uint8_t> bytes;
      if (!doc.path.empty()) bytes = io::read_bytes(doc.path);
      Extraction ex = extract_blocks(doc.report_id, bytes, *extractor);
      Segmentation seg = segment(filter_body(ex.blocks), seg_config);
      o.page_count = ex.page_count;
      o.blocks = std::move(ex.blocks);
      o.sequences = std::move(seg.sequences);
      o.warnings = std::move(ex.warnings);
      o.warnings.insert(o.warnings.end(), seg.warnings.begin(), seg.warnings.end());
    } catch (const std::exception& e) {
      o.error = ItemError{doc.report_id, e.what()};
    }
  });

  std::vector<ReportDocument> ok_reports;
  std::vector<LayoutBlock> blocks;
  std::vector<TextSequence> sequences;
  std::vector<Warning> warnings;
  std::vector<ItemError> errors;
  std::map<std::string, std::size_t> per_report;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    ReportOutcome& o = outcomes[i];
    if (o.error) {
      errors.push_back(*o.error);
      continue;
    }
    ReportDocument doc = reports[i];
    doc.page_count = o.page_count;
    ok_reports.push_back(doc);
    per_report[doc.report_id] = o.sequences.size();
    std::move(o.blocks.begin(), o.blocks.end(), std::back_inserter(blocks));
    std::move(o.sequences.begin(), o.sequences.end(), std::back_inserter(sequences));
    std::move(o.warnings.begin(), o.warnings.end(), std::back_inserter(warnings));
  }

  const CorpusStats stats = corpus_stats(ok_reports, per_report, banks);
  io::write_text(dir / "blocks.jsonl", io::format_blocks(blocks));
  io::write_text(dir / "sequences.jsonl", io::format_sequences(sequences));
  io::write_text(dir / "reports.tsv", io::format_reports(ok_reports, per_report));
  io::write_text(dir / "corpus_stats.tsv", io::format_corpus_stats(stats));
  io::write_text(dir / "bank_crosstab.tsv", io::format_bank_crosstab(stats.banks));
  io::write_text(dir / "warnings.tsv", io::format_warnings(warnings));
  io::write_text(dir / "errors.tsv", format_errors(errors));

  log.line("extractor: " + extractor->identity());
  log.line("reports: " + std::to_string(ok_reports.size()) + " ok, " + std::to_string(errors.size()) +
           " failed");
  log.line("sequences: " + std::to_string(sequences.size()));
  log.line("warnings: " + std::to_string(warnings.size()));
  for (const ItemError& e : errors) log.line("error: " + e.item + ": " + e.message);
  if (errors.empty()) return kExitOk;
  return ok_reports.empty() ? kExitFailure : kExitPartial;
}

// ---------------------------------------------------------------------------

struct ClassifyOptions {
  std::string sequences;
  std::string gold;
  std::string labels;
  std::string tmpl{kDefaultTemplate};
  std::string general_template;
  std::string backend = "mock";
  std::size_t batch_size = 32;
  std::size_t workers = 1;
};

int run_classify(const ClassifyOptions& opt, const fs::path& dir, RunLog& log) {
  const LabelSet labels = load_labels(opt.labels);
  std::optional<std::string> general;
  if (!opt.general_template.empty()) general = opt.general_template;
  const HypothesisTemplate tmpl(opt.tmpl, general);

  std::vector<TextSequence> sequences;
  if (!opt.sequences.empty()) {
    sequences = io::parse_sequences(io::read_text(opt.sequences));
  } else {
    const GoldSet gold = io::parse_gold(io::read_text(opt.gold));
    validate_gold(gold, labels);
    for (std::size_t i = 0; i < gold.annotations.size(); ++i) {
      const GoldAnnotation& a = gold.annotations[i];
      sequences.push_back({a.sentence_id, "", i, a.text, 0});
    }
  }

  // Backend problems surface here, before anything is scored.
  const auto backend = make_backend(opt.backend);
  BatchOptions batch;
  batch.batch_size = opt.batch_size;
  batch.workers = opt.workers;
  BatchResult result = batch_classify(sequences, labels, *backend, tmpl, batch);

  std::vector<ItemError> errors;
  for (const BatchFailure& f : result.failures) {
    errors.push_back({f.label_code.empty() ? f.sequence_id : f.sequence_id + "/" + f.label_code, f.message});
  }
  io::write_text(dir / "probabilities.tsv", io::format_probability_table(result.table));
  io::write_text(dir / "warnings.tsv", io::format_warnings(result.warnings));
  io::write_text(dir / "errors.tsv", format_errors(errors));

  log.line("backend: " + backend->identity());
  log.line("taxonomy: " + labels.version() + " (" + std::to_string(labels.size()) + " labels)");
  log.line("template-hash: " + tmpl.hash());
  log.line("sequences: " + std::to_string(sequences.size() - errors.size()) + " scored, " +
           std::to_string(errors.size()) + " failed");
  log.line("warnings: " + std::to_string(result.warnings.size()));
  if (errors.empty()) return kExitOk;
  return errors.size() == sequences.size() ? kExitFailure : kExitPartial;
}

// ---------------------------------------------------------------------------

struct AggregateOptions {
  std::string table;
  std::string reports;
  std::string registry;
  std::string labels;
  std::vector<std::string> keys{"financial_year", "label_code"};
  std::vector<std::string> trends;
  std::string growth = "2017:2021";
  bool report_weighted = false;
};

std::pair<std::string, std::string> split_pair(const std::string& s, const std::string& what) {
  const auto colon = s.find(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == s.size()) {
    throw ConfigError("invalid " + what + " '" + s + "' (expected A:B)");
  }
  return {s.substr(0, colon), s.substr(colon + 1)};
}

/// General labels interleaved with their category-level counterparts, the
/// layout of the yearly summary by pillar.
std::vector<std::string> pillar_rows(const LabelSet& labels) {
  std::vector<std::string> out;
  for (Pillar p : {Pillar::Governance, Pillar::Strategy, Pillar::RiskManagement, Pillar::MetricsTargets}) {
    for (Granularity g : {Granularity::General, Granularity::Category}) {
      for (const Label& l : labels) {
        if (l.pillar == p && l.granularity == g) out.push_back(l.code);
      }
    }
  }
  return out;
}

std::vector<std::string> codes_of(const LabelSet& labels, Granularity g) {
  std::vector<std::string> out;
  for (const Label& l : labels) {
    if (l.granularity == g && l.code != kNoneCode) out.push_back(l.code);
  }
  return out;
}

/// Each category label paired with the general label of its pillar.
std::vector<std::pair<std::string, std::string>> default_trends(const LabelSet& labels) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const Label& c : labels) {
    if (c.granularity != Granularity::Category) continue;
    for (const Label& g : labels) {
      if (g.granularity == Granularity::General && g.pillar == c.pillar && g.code != kNoneCode) {
        out.emplace_back(g.code, c.code);
        break;
      }
    }
  }
  return out;
}

int run_aggregate(const AggregateOptions& opt, const fs::path& dir, RunLog& log) {
  const LabelSet labels = load_labels(opt.labels);
  const ProbabilityTable table = io::parse_probability_table(io::read_text(opt.table));
  require_version(labels, table.provenance.taxonomy_version, opt.table);

  const fs::path reports_path(opt.reports);
  const auto reports = io::parse_manifest(io::read_text(reports_path), reports_path.parent_path());
  std::vector<BankRecord> banks;
  if (!opt.registry.empty()) banks = io::parse_registry(io::read_text(opt.registry));
  const ReportIndex index(reports, banks);

  std::vector<GroupKey> keys;
  for (const std::string& k : opt.keys) keys.push_back(parse_group_key(k));
  const Weighting weighting = opt.report_weighted ? Weighting::Report : Weighting::Sequence;
  const auto rows = mean_by(table.rows, index, keys, weighting);
  io::write_text(dir / "aggregate.tsv", io::format_aggregate(keys, rows));

  std::map<std::string, YearlySeries> series;
  for (const Label& l : labels) {
    YearlySeries s = yearly_means(table.rows, index, l.code);
    if (!s.empty()) series.emplace(l.code, std::move(s));
  }
  io::write_text(dir / "yearly_general_category.tsv", io::format_year_pivot(pillar_rows(labels), series));
  io::write_text(dir / "yearly_fine.tsv", io::format_year_pivot(codes_of(labels, Granularity::Fine), series));

  const auto [y0s, y1s] = split_pair(opt.growth, "growth years");
  const int y0 = std::stoi(y0s);
  const int y1 = std::stoi(y1s);
  std::vector<Warning> warnings;
  io::TsvWriter growth_out;
  growth_out.header({"label_code", "year_from", "year_to", "mean_from", "mean_to", "growth_pct"});
  for (const Label& l : labels) {
    const auto it = series.find(l.code);
    if (it == series.end()) continue;
    try {
      const double g = growth(it->second, y0, y1);
      growth_out.row({l.code, y0s, y1s, io::fixed(it->second.at(y0), 4), io::fixed(it->second.at(y1), 4),
                      io::fixed(100.0 * g, 1)});
    } catch (const Error& e) {
      warnings.push_back({l.code, std::string("growth: ") + e.what()});
    }
  }
  io::write_text(dir / "growth.tsv", growth_out.str());

  std::vector<std::pair<std::string, std::string>> pairs;
  for (const std::string& t : opt.trends) pairs.push_back(split_pair(t, "trend pair"));
  if (opt.trends.empty()) pairs = default_trends(labels);
  for (const auto& [general, climate] : pairs) {
    labels.lookup(general);
    labels.lookup(climate);
    try {
      const auto points = trend_series(table.rows, index, general, climate);
      io::write_text(dir / ("trend_" + climate + ".tsv"), io::format_trend(general, climate, points));
    } catch (const MissingDataError& e) {
      warnings.push_back({climate, std::string("trend: ") + e.what()});
    }
  }

  std::vector<DistributionStats> boxes;
  for (const std::string& code : codes_of(labels, Granularity::Fine)) {
    if (series.contains(code)) boxes.push_back(distribution(table.rows, code));
  }
  io::write_text(dir / "boxplots.tsv", io::format_boxplots(boxes));
  io::write_text(dir / "warnings.tsv", io::format_warnings(warnings));

  log.line("rows: " + std::to_string(table.rows.size()));
  log.line("groups: " + std::to_string(rows.size()));
  log.line("warnings: " + std::to_string(warnings.size()));
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct EvaluateOptions {
  std::string gold;
  std::string table;
  std::string labels;
  double threshold = 0.5;
  bool include_none = false;
};

int run_evaluate(const EvaluateOptions& opt, const fs::path& dir, RunLog& log) {
  const LabelSet labels = load_labels(opt.labels);
  const GoldSet gold = io::parse_gold(io::read_text(opt.gold));
  validate_gold(gold, labels);
  const ProbabilityTable table = io::parse_probability_table(io::read_text(opt.table));
  require_version(labels, table.provenance.taxonomy_version, opt.table);

  const EvaluationReport report = evaluate(gold, table, labels, opt.threshold, opt.include_none);
  const ProbabilityMatrix matrix = probability_matrix(gold.annotations, table.rows, labels);
  io::write_text(dir / "evaluation.tsv", io::format_evaluation_table(report));
  io::write_text(dir / "per_label.tsv", io::format_evaluation_per_label(report));
  io::write_text(dir / "summary.json", io::format_evaluation_summary(report));
  io::write_text(dir / "matrix.tsv", io::format_matrix(matrix));

  log.line("backend: " + table.provenance.backend);
  log.line("threshold: " + io::fixed(opt.threshold, 3));
  log.line("micro-f1: " + io::fixed(report.overall.micro, 4));
  log.line("macro-f1: " + io::fixed(report.overall.macro, 4));
  log.line("weighted-f1: " + io::fixed(report.overall.weighted, 4));
  return kExitOk;
}

// ---------------------------------------------------------------------------

int run_labels(const std::string& check, const fs::path& dir, RunLog& log) {
  if (check.empty()) {
    io::write_text(dir / "labels.tsv", io::format_label_set(builtin_taxonomy()));
    log.line("wrote " + (dir / "labels.tsv").string());
    return kExitOk;
  }
  const LabelSet set = io::parse_label_set(io::read_text(check));
  const auto findings = validate(set);
  for (const auto& f : findings) log.line("invalid: " + f.code + ": " + f.message);
  log.line(std::to_string(set.size()) + " labels, version " + set.version());
  return findings.empty() ? kExitOk : kExitFailure;
}

/// Options of the invoked command only, so `tcfd --config <file> <command>`
/// repeats the run. The run directory is left out on purpose.
std::string snapshot(const CLI::App& app, const CLI::App& cmd) {
  std::istringstream full(app.config_to_str(true, false));
  std::string out;
  for (std::string line; std::getline(full, line);) {
    const std::string key = line.substr(0, line.find('='));
    if (key == "out") continue;
    const auto dot = key.find('.');
    if (dot != std::string::npos && key.substr(0, dot) != cmd.get_name()) continue;
    // Unset options would read back as explicitly given.
    const std::string value = line.substr(key.size() + 1);
    if (value == "\"\"" || value == "[]") continue;
    out += line + '\n';
  }
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Zero-shot TCFD disclosure classification for bank reports", "tcfd"};
  app.set_config("--config", "", "Replay options from a config.toml snapshot");
  app.require_subcommand(1);
  app.fallthrough();
  std::string out_dir;
  app.add_option("--out", out_dir, "Run directory (default runs/<command>-<UTC time>)");

  IngestOptions ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Extract, filter and segment reports");
  ingest_cmd->add_option("--manifest", ingest.manifest, "Report manifest TSV")->required();
  ingest_cmd->add_option("--registry", ingest.registry, "Bank registry TSV")->required();
  ingest_cmd->add_option("--extractor", ingest.extractor, "heuristic or blocks:<jsonl>")->capture_default_str();
  ingest_cmd->add_option("--unit", ingest.unit, "Segmentation unit: sentence or block")->capture_default_str();
  ingest_cmd->add_option("--max-tokens", ingest.max_tokens, "Maximum words per sequence")->capture_default_str();
  ingest_cmd->add_option("--workers", ingest.workers, "Reports processed in parallel")->capture_default_str();

  ClassifyOptions classify;
  auto* classify_cmd = app.add_subcommand("classify", "Score sequences against every label");
  auto* seq_opt = classify_cmd->add_option("--sequences", classify.sequences, "sequences.jsonl from ingest");
  auto* gold_opt = classify_cmd->add_option("--gold", classify.gold, "Score the sentences of a gold TSV");
  seq_opt->excludes(gold_opt);
  gold_opt->excludes(seq_opt);
  classify_cmd->add_option("--labels", classify.labels, "Label TSV (default: built-in taxonomy)");
  classify_cmd->add_option("--template", classify.tmpl, "Hypothesis template with one {}")->capture_default_str();
  classify_cmd->add_option("--general-template", classify.general_template,
                           "Template for the four general labels");
  classify_cmd->add_option("--backend", classify.backend, "mock, model or model:<dir>")->capture_default_str();
  classify_cmd->add_option("--batch-size", classify.batch_size)->capture_default_str();
  classify_cmd->add_option("--workers", classify.workers)->capture_default_str();

  AggregateOptions aggregate;
  auto* aggregate_cmd = app.add_subcommand("aggregate", "Group means, yearly tables, trends and box plots");
  aggregate_cmd->add_option("--table", aggregate.table, "probabilities.tsv from classify")->required();
  aggregate_cmd->add_option("--reports", aggregate.reports, "reports.tsv or manifest")->required();
  aggregate_cmd->add_option("--registry", aggregate.registry, "Bank registry (needed for region/size keys)");
  aggregate_cmd->add_option("--labels", aggregate.labels, "Label TSV (default: built-in taxonomy)");
  aggregate_cmd->add_option("--keys", aggregate.keys, "Group keys")->delimiter(',')->capture_default_str();
  aggregate_cmd->add_option("--trend", aggregate.trends, "GENERAL:CLIMATE label pair (repeatable)");
  aggregate_cmd->add_option("--growth", aggregate.growth, "Years FROM:TO for growth.tsv")->capture_default_str();
  aggregate_cmd->add_flag("--report-weighted", aggregate.report_weighted, "Weight every report equally");

  EvaluateOptions evaluate_opt;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score probabilities against gold labels");
  evaluate_cmd->add_option("--gold", evaluate_opt.gold, "Gold TSV")->required();
  evaluate_cmd->add_option("--table", evaluate_opt.table, "probabilities.tsv from classify")->required();
  evaluate_cmd->add_option("--labels", evaluate_opt.labels, "Label TSV (default: built-in taxonomy)");
  evaluate_cmd->add_option("--threshold", evaluate_opt.threshold, "Decision threshold in (0,1)")
      ->capture_default_str();
  evaluate_cmd->add_flag("--include-none", evaluate_opt.include_none, "Score NONE like other labels");

  std::string check;
  auto* labels_cmd = app.add_subcommand("labels", "Write the built-in taxonomy or check a label file");
  labels_cmd->add_option("--check", check, "Label TSV to validate");

  std::vector<std::string> argv_store{"tcfd"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
    if (classify_cmd->parsed() && classify.sequences.empty() && classify.gold.empty()) {
      throw CLI::RequiredError("--sequences or --gold");
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitFailure;
  }

  RunLog log(err);
  try {
    const CLI::App* cmd = app.get_subcommands().front();
    const fs::path dir = make_run_dir(out_dir, cmd->get_name());
    io::write_text(dir / "config.toml", snapshot(app, *cmd));
    int code = kExitFailure;
    if (cmd == ingest_cmd) code = run_ingest(ingest, dir, log);
    if (cmd == classify_cmd) code = run_classify(classify, dir, log);
    if (cmd == aggregate_cmd) code = run_aggregate(aggregate, dir, log);
    if (cmd == evaluate_cmd) code = run_evaluate(evaluate_opt, dir, log);
    if (cmd == labels_cmd) code = run_labels(check, dir, log);
    log.line("run: " + dir.string());
    io::write_text(dir / "run.log", log.text());
    return code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace tcfd::cli
