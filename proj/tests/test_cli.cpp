#include <sstream>

#include "doctest.h"
#include "support/gen.hpp"
#include "tcfd/analytics.hpp"
#include "tcfd/cli.hpp"
#include "tcfd/corpus.hpp"
#include "tcfd/io.hpp"
#include "tcfd/nli.hpp"

using namespace tcfd;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result tcfd_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string corpus(const std::string& f) { return data_path("corpus/" + f).string(); }

Result ingest(const fs::path& dir, const std::string& manifest = "manifest.tsv", std::string workers = "1") {
  return tcfd_run({"ingest", "--manifest", corpus(manifest), "--registry", corpus("registry.tsv"), "--workers",
                   workers, "--out", dir.string()});
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit with 1, help with 0") {
  CHECK(tcfd_run({}).code == 1);
  CHECK(tcfd_run({"frobnicate"}).code == 1);
  CHECK(tcfd_run({"--help"}).code == 0);
  CHECK(tcfd_run({"classify", "--out", "unused"}).code == 1);
}

TEST_CASE("labels command") {
  TempDir tmp("labels");
  CHECK(tcfd_run({"labels", "--out", (tmp / "run").string()}).code == 0);
  CHECK(io::parse_label_set(io::read_text(tmp / "run/labels.tsv")).size() == 23);
  CHECK(tcfd_run({"labels", "--check", data_path("labels/custom.tsv").string(), "--out", (tmp / "c").string()}).code == 0);
  io::write_text(tmp / "bad.tsv", "code\tpillar\tgranularity\tdescription\nZZ.1.1\tStrategy\tFine\tx\n");
  CHECK(tcfd_run({"labels", "--check", (tmp / "bad.tsv").string(), "--out", (tmp / "b").string()}).code == 1);
}

TEST_CASE("ingest the three-report corpus") {
  TempDir tmp("ingest");
  const auto dir = tmp / "run";
  const Result r = ingest(dir);
  CHECK(r.code == 0);
  for (const char* f : {"config.toml", "run.log", "blocks.jsonl", "sequences.jsonl", "reports.tsv",
                        "corpus_stats.tsv", "bank_crosstab.tsv", "warnings.tsv", "errors.tsv"}) {
    CHECK_MESSAGE(fs::exists(dir / f), f);
  }
  const auto seqs = io::parse_sequences(io::read_text(dir / "sequences.jsonl"));
  std::set<std::string> reports;
  for (const auto& s : seqs) reports.insert(s.report_id);
  CHECK(reports == std::set<std::string>{"R1", "R2", "R3"});
  const io::Tsv stats = io::parse_tsv(io::read_text(dir / "corpus_stats.tsv"));
  CHECK(stats.rows.back()[0] == "ALL");
  CHECK(stats.rows.back()[1] == "3");
  const auto docs = io::parse_manifest(io::read_text(dir / "reports.tsv"));
  REQUIRE(docs.size() == 3);
  CHECK(docs[0].page_count == 2);
}

TEST_CASE("ingest keeps going past broken reports") {
  TempDir tmp("partial");
  const auto dir = tmp / "run";
  const Result r = ingest(dir, "manifest_partial.tsv", "4");
  CHECK(r.code == 2);
  const io::Tsv errors = io::parse_tsv(io::read_text(dir / "errors.tsv"));
  REQUIRE(errors.rows.size() == 2);
  CHECK(errors.rows[0][0] == "R4");
  CHECK(errors.rows[1][0] == "R5");
  const auto seqs = io::parse_sequences(io::read_text(dir / "sequences.jsonl"));
  CHECK(!seqs.empty());
  CHECK(io::parse_manifest(io::read_text(dir / "reports.tsv")).size() == 1);
}

TEST_CASE("ingest of an empty manifest succeeds with empty outputs") {
  TempDir tmp("empty");
  io::write_text(tmp / "m.tsv", "report_id\tbank_id\tcategory\tfinancial_year\n");
  const Result r = tcfd_run({"ingest", "--manifest", (tmp / "m.tsv").string(), "--registry", corpus("registry.tsv"),
                             "--out", (tmp / "run").string()});
  CHECK(r.code == 0);
  CHECK(io::read_text(tmp / "run/sequences.jsonl").empty());
}

TEST_CASE("ingest from pre-tagged blocks") {
  TempDir tmp("blocks");
  const Result r = tcfd_run({"ingest", "--manifest", corpus("manifest.tsv"), "--registry", corpus("registry.tsv"),
                             "--extractor", "blocks:" + corpus("blocks.jsonl"), "--out", (tmp / "run").string()});
  CHECK(r.code == 0);
  const auto seqs = io::parse_sequences(io::read_text(tmp / "run/sequences.jsonl"));
  CHECK(seqs.size() == 10);
  CHECK(tcfd_run({"ingest", "--manifest", corpus("manifest.tsv"), "--registry", corpus("registry.tsv"),
                  "--extractor", "ocr", "--out", (tmp / "bad").string()})
            .code == 1);
}

TEST_CASE("classify") {
  TempDir tmp("classify");
  REQUIRE(ingest(tmp / "ingest").code == 0);
  const std::string seqs = (tmp / "ingest/sequences.jsonl").string();
  const auto n_seqs = io::parse_sequences(io::read_text(seqs)).size();

  SUBCASE("repeat runs are identical") {
    CHECK(tcfd_run({"classify", "--sequences", seqs, "--out", (tmp / "a").string()}).code == 0);
    CHECK(tcfd_run({"classify", "--sequences", seqs, "--workers", "4", "--batch-size", "3", "--out",
                    (tmp / "b").string()})
              .code == 0);
    const std::string a = io::read_text(tmp / "a/probabilities.tsv");
    CHECK(a == io::read_text(tmp / "b/probabilities.tsv"));
    CHECK(io::parse_probability_table(a).rows.size() == n_seqs * 23);
  }
  SUBCASE("custom label file") {
    CHECK(tcfd_run({"classify", "--sequences", seqs, "--labels", data_path("labels/custom.tsv").string(), "--out",
                    (tmp / "c").string()})
              .code == 0);
    const auto t = io::parse_probability_table(io::read_text(tmp / "c/probabilities.tsv"));
    CHECK(t.rows.size() == n_seqs * 3);
    CHECK(t.provenance.taxonomy_version == "custom-3");
  }
  SUBCASE("missing model bundle fails before scoring") {
    const Result r = tcfd_run({"classify", "--sequences", seqs, "--backend", "model:" + (tmp / "nope").string(),
                               "--out", (tmp / "m").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("model bundle directory not found") != std::string::npos);
    CHECK_FALSE(fs::exists(tmp / "m/probabilities.tsv"));
  }
  SUBCASE("bad template") {
    CHECK(tcfd_run({"classify", "--sequences", seqs, "--template", "no slot", "--out", (tmp / "t").string()}).code == 1);
  }
  SUBCASE("gold input") {
    CHECK(tcfd_run({"classify", "--gold", data_path("gold/gold.tsv").string(), "--out", (tmp / "g").string()}).code == 0);
    CHECK(io::parse_probability_table(io::read_text(tmp / "g/probabilities.tsv")).rows.size() == 48 * 23);
  }
  SUBCASE("sequences and gold are exclusive") {
    CHECK(tcfd_run({"classify", "--sequences", seqs, "--gold", data_path("gold/gold.tsv").string(), "--out",
                    (tmp / "x").string()})
              .code == 1);
  }
}

TEST_CASE("commands compose like the library calls") {
  TempDir tmp("compose");
  REQUIRE(ingest(tmp / "i").code == 0);
  REQUIRE(tcfd_run({"classify", "--sequences", (tmp / "i/sequences.jsonl").string(), "--out", (tmp / "c").string()})
              .code == 0);
  REQUIRE(tcfd_run({"aggregate", "--table", (tmp / "c/probabilities.tsv").string(), "--reports",
                    (tmp / "i/reports.tsv").string(), "--registry", corpus("registry.tsv"), "--out",
                    (tmp / "a").string()})
              .code == 0);

  // The same pipeline through the library.
  const auto reports = io::parse_manifest(io::read_text(corpus("manifest.tsv")), data_path("corpus"));
  const auto banks = io::parse_registry(io::read_text(corpus("registry.tsv")));
  std::vector<TextSequence> sequences;
  for (const auto& doc : reports) {
    const Extraction ex = extract_blocks(doc.report_id, io::read_bytes(doc.path), HeuristicExtractor{});
    const Segmentation seg = segment(filter_body(ex.blocks));
    sequences.insert(sequences.end(), seg.sequences.begin(), seg.sequences.end());
  }
  CHECK(io::parse_sequences(io::read_text(tmp / "i/sequences.jsonl")) == sequences);

  const BatchResult direct = batch_classify(sequences, builtin_taxonomy(), LexicalMockScorer{}, HypothesisTemplate{}, {});
  const auto via_cli = io::parse_probability_table(io::read_text(tmp / "c/probabilities.tsv"));
  REQUIRE(via_cli.rows.size() == direct.table.rows.size());
  CHECK(via_cli.provenance == direct.table.provenance);
  for (std::size_t i = 0; i < direct.table.rows.size(); ++i) {
    CHECK(via_cli.rows[i].sequence_id == direct.table.rows[i].sequence_id);
    CHECK(via_cli.rows[i].label_code == direct.table.rows[i].label_code);
    // The table stores six decimals.
    CHECK(std::abs(via_cli.rows[i].p - direct.table.rows[i].p) <= 5e-7);
  }

  const std::vector<GroupKey> keys{GroupKey::FinancialYear, GroupKey::LabelCode};
  const auto expected = mean_by(direct.table.rows, ReportIndex(reports, banks), keys);
  const io::Tsv agg = io::parse_tsv(io::read_text(tmp / "a/aggregate.tsv"));
  REQUIRE(agg.rows.size() == expected.size());
  const auto full = agg.require_column("mean_full");
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(agg.rows[i][0] == expected[i].keys[0].text);
    CHECK(agg.rows[i][1] == expected[i].keys[1].text);
    CHECK(std::abs(std::stod(agg.rows[i][full]) - expected[i].mean) <= 1e-6);
  }
  for (const char* f : {"yearly_general_category.tsv", "yearly_fine.tsv", "growth.tsv", "trend_GO.1.tsv",
                        "trend_MT.1.tsv", "boxplots.tsv"}) {
    CHECK_MESSAGE(fs::exists(tmp / "a" / f), f);
  }
}

TEST_CASE("aggregate on the yearly-means fixture") {
  TempDir tmp("table4");
  const Result r = tcfd_run({"aggregate", "--table", data_path("table4/probabilities.tsv").string(), "--reports",
                             data_path("table4/reports.tsv").string(), "--trend", "GENERAL.STRATEGY:ST.1", "--out",
                             (tmp / "a").string()});
  REQUIRE(r.code == 0);
  // The pivot reproduces the two-decimal means of the fixture.
  const io::Tsv pivot = io::parse_tsv(io::read_text(tmp / "a/yearly_general_category.tsv"));
  const io::Tsv expected = io::parse_tsv(io::read_text(data_path("table4/means.tsv")));
  CHECK(pivot.header == expected.header);
  CHECK(pivot.rows == expected.rows);

  const io::Tsv growth = io::parse_tsv(io::read_text(tmp / "a/growth.tsv"));
  std::map<std::string, std::string> pct;
  for (const auto& row : growth.rows) pct[row[0]] = row[growth.require_column("growth_pct")];
  CHECK(pct.at("GO.1") == "46.2");
  CHECK(pct.at("ST.1") == "57.1");
  CHECK(pct.at("RM.1") == "60.0");
  CHECK(pct.at("MT.1") == "53.8");
  CHECK(fs::exists(tmp / "a/trend_ST.1.tsv"));
  CHECK_FALSE(fs::exists(tmp / "a/trend_GO.1.tsv"));

  CHECK(tcfd_run({"aggregate", "--table", data_path("table4/probabilities.tsv").string(), "--reports",
                  data_path("table4/reports.tsv").string(), "--labels", data_path("labels/custom.tsv").string(),
                  "--out", (tmp / "v").string()})
            .code == 1);
  CHECK(tcfd_run({"aggregate", "--table", data_path("table4/probabilities.tsv").string(), "--reports",
                  data_path("table4/reports.tsv").string(), "--keys", "region", "--out", (tmp / "r").string()})
            .code == 1);
}

TEST_CASE("evaluate") {
  TempDir tmp("evaluate");
  const std::string gold = data_path("gold/gold.tsv").string();
  REQUIRE(tcfd_run({"classify", "--gold", gold, "--out", (tmp / "c").string()}).code == 0);
  const std::string table = (tmp / "c/probabilities.tsv").string();
  const Result r = tcfd_run({"evaluate", "--gold", gold, "--table", table, "--threshold", "0.5", "--out",
                             (tmp / "e").string()});
  CHECK(r.code == 0);
  for (const char* f : {"evaluation.tsv", "per_label.tsv", "summary.json", "matrix.tsv"}) {
    CHECK_MESSAGE(fs::exists(tmp / "e" / f), f);
  }
  const std::string summary = io::read_text(tmp / "e/summary.json");
  CHECK(summary.find("\"micro_f1\"") != std::string::npos);
  CHECK(summary.find("\"threshold\": 0.5") != std::string::npos);

  SUBCASE("threshold outside (0,1)") {
    CHECK(tcfd_run({"evaluate", "--gold", gold, "--table", table, "--threshold", "1.5", "--out",
                    (tmp / "t").string()})
              .code == 1);
  }
  SUBCASE("taxonomy version mismatch") {
    std::string text = io::read_text(table);
    text.replace(text.find("builtin-tcfd-1"), 14, "builtin-tcfd-0");
    io::write_text(tmp / "old.tsv", text);
    const Result bad = tcfd_run({"evaluate", "--gold", gold, "--table", (tmp / "old.tsv").string(), "--out",
                                 (tmp / "v").string()});
    CHECK(bad.code == 1);
    CHECK(bad.err.find("taxonomy") != std::string::npos);
  }
}

TEST_CASE("a run replays from its config snapshot") {
  TempDir tmp("replay");
  REQUIRE(ingest(tmp / "i").code == 0);
  REQUIRE(tcfd_run({"classify", "--sequences", (tmp / "i/sequences.jsonl").string(), "--batch-size", "7", "--out",
                    (tmp / "c1").string()})
              .code == 0);
  const std::string snapshot = io::read_text(tmp / "c1/config.toml");
  CHECK(snapshot.find("classify.batch-size=7") != std::string::npos);
  CHECK(snapshot.find("ingest.") == std::string::npos);

  REQUIRE(tcfd_run({"--config", (tmp / "c1/config.toml").string(), "classify", "--out", (tmp / "c2").string()}).code ==
          0);
  CHECK(io::read_text(tmp / "c1/probabilities.tsv") == io::read_text(tmp / "c2/probabilities.tsv"));
  CHECK(io::read_text(tmp / "c1/config.toml") == io::read_text(tmp / "c2/config.toml"));

  REQUIRE(tcfd_run({"--config", (tmp / "i/config.toml").string(), "ingest", "--out", (tmp / "i2").string()}).code == 0);
  CHECK(io::read_text(tmp / "i/sequences.jsonl") == io::read_text(tmp / "i2/sequences.jsonl"));
}

TEST_CASE("default run directory") {
  TempDir tmp("default");
  const fs::path cwd = fs::current_path();
  fs::current_path(tmp.path());
  const Result r = tcfd_run({"labels"});
  fs::current_path(cwd);
  CHECK(r.code == 0);
  REQUIRE(fs::exists(tmp / "runs"));
  const auto entry = *fs::directory_iterator(tmp / "runs");
  CHECK(entry.path().filename().string().starts_with("labels-"));
  CHECK(fs::exists(entry.path() / "labels.tsv"));
}

}
