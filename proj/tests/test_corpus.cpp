#include <numeric>

#include "doctest.h"
#include "support/gen.hpp"
#include "tcfd/corpus.hpp"
#include "tcfd/io.hpp"
#include "tcfd/pdf.hpp"
#include "tcfd/text.hpp"

using namespace tcfd;

namespace {

Extraction extract_fixture(const std::string& name) {
  const auto bytes = io::read_bytes(data_path("pdf/" + name));
  return extract_blocks(name, bytes, HeuristicExtractor{});
}

LayoutBlock block(std::string report, std::size_t index, BlockTag tag, std::string text) {
  return {std::move(report), index, tag, std::move(text), 1};
}

std::vector<BlockTag> tags_of(const std::vector<LayoutBlock>& blocks) {
  std::vector<BlockTag> out;
  for (const auto& b : blocks) out.push_back(b.tag);
  return out;
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("paragraph and table page yields one body block and one table block") {
  const Extraction ex = extract_fixture("paragraph_table.pdf");
  CHECK(ex.page_count == 1);
  REQUIRE(ex.blocks.size() == 2);
  CHECK(ex.blocks[0].tag == BlockTag::BodyContent);
  CHECK(ex.blocks[1].tag == BlockTag::Table);
  CHECK(ex.blocks[0].text.starts_with("The board of directors oversees climate-related issues"));
  CHECK(ex.blocks[0].text.ends_with("to the risk committee."));
  CHECK(ex.blocks[0].block_index == 0);
  CHECK(ex.blocks[1].block_index == 1);
  CHECK(ex.warnings.empty());
}

TEST_CASE("empty document yields no blocks") {
  const Extraction ex = extract_fixture("empty.pdf");
  CHECK(ex.page_count == 0);
  CHECK(ex.blocks.empty());
  CHECK(ex.warnings.empty());
}

TEST_CASE("image-only document yields no blocks and a warning") {
  const Extraction ex = extract_fixture("image_only.pdf");
  CHECK(ex.page_count == 1);
  CHECK(ex.blocks.empty());
  REQUIRE(ex.warnings.size() == 1);
  CHECK(ex.warnings[0].subject == "image_only.pdf");
}

TEST_CASE("unreadable documents raise an extraction error naming the report") {
  for (const char* name : {"malformed.pdf", "encrypted.pdf"}) {
    CAPTURE(name);
    try {
      extract_fixture(name);
      FAIL("expected ExtractionError");
    } catch (const ExtractionError& e) {
      CHECK(e.report_id() == name);
    }
  }
  const std::vector<std::uint8_t> garbage{'%', 'P', 'D', 'F', '-', '1', '.', '4', '\n'};
  CHECK_THROWS_AS(extract_blocks("R", garbage, HeuristicExtractor{}), ExtractionError);
}

TEST_CASE("two-byte font codes decode through the ToUnicode map") {
  const Extraction ex = extract_fixture("tounicode.pdf");
  REQUIRE(ex.blocks.size() == 1);
  CHECK(ex.blocks[0].text == "Climate risk is material.");
}

TEST_CASE("pdf reader reports positions and sizes") {
  const auto bytes = io::read_bytes(data_path("pdf/paragraph_table.pdf"));
  const auto doc = pdf::Document::parse(bytes);
  REQUIRE(doc.page_count() == 1);
  std::vector<std::string> warnings;
  const auto runs = doc.text_runs(0, warnings);
  REQUIRE(!runs.empty());
  CHECK(runs.front().x == doctest::Approx(72));
  CHECK(runs.front().y == doctest::Approx(780));
  CHECK(runs.front().font_size == doctest::Approx(11));
  CHECK(runs.front().width > 0);
}

TEST_CASE("extraction is deterministic") {
  CHECK(extract_fixture("paragraph_table.pdf").blocks == extract_fixture("paragraph_table.pdf").blocks);
}

TEST_CASE("tag_block heuristic") {
  CHECK(tag_block("The board oversees climate-related issues every quarter.", 1) == BlockTag::BodyContent);
  CHECK(tag_block("2019 12,345 6,789 4.5%", 1) == BlockTag::Table);
  // Short lines read as table cells even without digits.
  CHECK(tag_block("Total Assets Equity Loans", 2) == BlockTag::Table);
  CHECK(tag_block("", 1) == BlockTag::Other);
  // Exactly at the density threshold is not a table: 4 digits out of 10 visible.
  CHECK(tag_block("12 34 abc def", 1) == BlockTag::BodyContent);
}

TEST_CASE("layout_page groups runs into lines and blocks") {
  std::vector<pdf::TextRun> runs{
      {72, 700, 10, 40, "climate"},
      {115, 700, 10, 30, "risk is"},  // same line, gap 3pt -> space
      {72, 688, 10, 60, "material for the bank"},
      {72, 676, 10, 60, "and its lenders inter-"},
      {72, 664, 10, 60, "national peers alike"},
      {72, 600, 10, 60, "second block of words here"},  // gap of 64pt -> new block
  };
  const auto blocks = layout_page("R", 3, runs, 5);
  REQUIRE(blocks.size() == 2);
  // A line-final hyphen is kept and joined without a space.
  CHECK(blocks[0].text ==
        "climate risk is material for the bank and its lenders inter-national peers alike");
  CHECK(blocks[0].page == 3);
  CHECK(blocks[0].block_index == 5);
  CHECK(blocks[1].block_index == 6);
  CHECK(blocks[1].text == "second block of words here");
}

TEST_CASE("layout_page starts a block on a font size change") {
  std::vector<pdf::TextRun> runs{
      {72, 700, 18, 100, "A Large Heading Line"},
      {72, 684, 10, 100, "body text follows the heading directly here"},
  };
  const auto blocks = layout_page("R", 1, runs, 0);
  REQUIRE(blocks.size() == 2);
}

TEST_CASE("filter_body keeps body content and abstract in order") {
  const std::vector<LayoutBlock> in{block("R", 0, BlockTag::BodyContent, "b"), block("R", 1, BlockTag::Table, "t"),
                                    block("R", 2, BlockTag::Abstract, "a"), block("R", 3, BlockTag::Figure, "f")};
  CHECK(tags_of(filter_body(in)) == std::vector<BlockTag>{BlockTag::BodyContent, BlockTag::Abstract});
  CHECK(filter_body(std::vector<LayoutBlock>{}).empty());
  CHECK(filter_body(std::vector<LayoutBlock>{block("R", 0, BlockTag::Table, "t"),
                                             block("R", 1, BlockTag::Figure, "f")})
            .empty());
}

TEST_CASE("filter_body is idempotent") {
  testgen::Rng rng(11);
  const std::array tags{BlockTag::BodyContent, BlockTag::Abstract, BlockTag::Title,
                        BlockTag::Figure,      BlockTag::Table,    BlockTag::Other};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<LayoutBlock> in;
    const std::size_t n = testgen::index(rng, 30);
    for (std::size_t i = 0; i < n; ++i) {
      in.push_back(block("R", i, tags[testgen::index(rng, tags.size())], "text " + std::to_string(i)));
    }
    const auto once = filter_body(in);
    CHECK(filter_body(once) == once);
  }
}

TEST_CASE("segment splits sentences") {
  const std::vector<LayoutBlock> in{block("R1", 0, BlockTag::BodyContent, "Climate risk rose. We responded.")};
  const Segmentation seg = segment(in);
  REQUIRE(seg.sequences.size() == 2);
  CHECK(seg.sequences[0].text == "Climate risk rose.");
  CHECK(seg.sequences[0].sequence_id == "R1:00000");
  CHECK(seg.sequences[1].sequence_id == "R1:00001");
  CHECK(seg.sequences[1].ordinal == 1);
  CHECK(seg.sequences[1].token_count == 2);
  CHECK(seg.warnings.empty());
  CHECK(segment(std::vector<LayoutBlock>{}).sequences.empty());
}

TEST_CASE("segment hard-splits units longer than the limit") {
  std::string sentence;
  for (int i = 0; i < 900; ++i) sentence += "w" + std::to_string(i) + " ";
  const std::vector<LayoutBlock> in{block("R", 0, BlockTag::BodyContent, sentence)};
  const Segmentation seg = segment(in, {SegmentationConfig::Unit::Sentence, 512});
  REQUIRE(seg.sequences.size() == 2);
  CHECK(text::word_count(seg.sequences[0].text) == 512);
  CHECK(text::word_count(seg.sequences[1].text) == 388);
  CHECK(seg.sequences[0].token_count == 512);
  CHECK(seg.sequences[1].text.starts_with("w512 "));
  CHECK(seg.warnings.size() == 1);
}

TEST_CASE("segment drops whitespace-only blocks and numbers ordinals per report") {
  const std::vector<LayoutBlock> in{block("A", 0, BlockTag::BodyContent, "First. Second."),
                                    block("A", 1, BlockTag::BodyContent, " \n\t "),
                                    block("B", 0, BlockTag::BodyContent, "Other report."),
                                    block("A", 2, BlockTag::BodyContent, "Third.")};
  const Segmentation seg = segment(in);
  std::vector<std::string> ids;
  for (const auto& s : seg.sequences) ids.push_back(s.sequence_id);
  CHECK(ids == std::vector<std::string>{"A:00000", "A:00001", "B:00000", "A:00002"});
}

TEST_CASE("segment by block") {
  const std::vector<LayoutBlock> in{block("R", 0, BlockTag::BodyContent, "One. Two.")};
  const Segmentation seg = segment(in, {SegmentationConfig::Unit::Block, 512});
  REQUIRE(seg.sequences.size() == 1);
  CHECK(seg.sequences[0].text == "One. Two.");
  CHECK_THROWS_AS(segment(in, {SegmentationConfig::Unit::Block, 0}), ConfigError);
}

TEST_CASE("sequence texts reassemble the filtered block texts") {
  testgen::Rng rng(5);
  const std::array<std::string, 6> vocab{"Climate", "risk", "rose.", "We", "acted!", "Banks"};
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<LayoutBlock> blocks;
    const std::size_t n = 1 + testgen::index(rng, 6);
    for (std::size_t i = 0; i < n; ++i) {
      std::string t;
      const std::size_t words = testgen::index(rng, 40);
      for (std::size_t w = 0; w < words; ++w) {
        t += vocab[testgen::index(rng, vocab.size())];
        t += testgen::coin(rng, 0.2) ? "\n" : " ";
      }
      blocks.push_back(block("R", i, testgen::coin(rng, 0.7) ? BlockTag::BodyContent : BlockTag::Table, t));
    }
    const auto body = filter_body(blocks);
    std::string expected;
    for (const auto& b : body) expected += " " + b.text;
    const Segmentation seg = segment(body, {SegmentationConfig::Unit::Sentence, 7});
    std::string actual;
    for (const auto& s : seg.sequences) {
      CHECK(s.token_count <= 7);
      actual += " " + s.text;
    }
    CHECK(text::normalize_whitespace(actual) == text::normalize_whitespace(expected));
  }
}

TEST_CASE("classify_size") {
  CHECK(classify_size(600e9) == SizeClass::Large);
  CHECK(classify_size(500e9) == SizeClass::Medium);
  CHECK(classify_size(500.000001e9) == SizeClass::Large);
  CHECK(classify_size(50e9) == SizeClass::Medium);
  CHECK(classify_size(49.999e9) == SizeClass::Small);
  CHECK(classify_size(0) == SizeClass::Small);
  CHECK_THROWS_AS(classify_size(-1), DomainError);
}

TEST_CASE("pretagged extractor") {
  const auto blocks = io::parse_blocks(io::read_text(data_path("corpus/blocks.jsonl")));
  const PretaggedExtractor ex(blocks, "blocks.jsonl");
  CHECK(ex.identity() == "pretagged:blocks.jsonl");
  const Extraction r1 = ex.extract("R1", {});
  CHECK(r1.blocks.size() == 5);
  CHECK(r1.page_count == 2);
  CHECK_THROWS_AS(ex.extract("R9", {}), ExtractionError);

  const PretaggedExtractor bad({block("R", 2, BlockTag::BodyContent, "x"), block("R", 2, BlockTag::BodyContent, "y")});
  CHECK_THROWS_AS(bad.extract("R", {}), ExtractionError);
}

TEST_CASE("corpus_stats means by category") {
  std::vector<ReportDocument> reports{{"A", "B1", ReportCategory::Annual, 2020, 100, ""},
                                      {"B", "B1", ReportCategory::Annual, 2021, 300, ""},
                                      {"C", "B1", ReportCategory::TCFD, 2021, 20, ""}};
  const CorpusStats stats = corpus_stats(reports, {{"A", 10}, {"B", 30}, {"C", 5}}, {});
  REQUIRE(stats.categories.size() == 7);
  CHECK(stats.categories[0].category == ReportCategory::Annual);
  CHECK(stats.categories[0].reports == 2);
  CHECK(stats.categories[0].mean_pages == 200.0);
  CHECK(stats.categories[0].mean_sequences == 20.0);
  CHECK(stats.total_reports == 3);
  CHECK(stats.mean_pages == doctest::Approx(140.0));
}

TEST_CASE("corpus_stats of an empty corpus is all zero") {
  const CorpusStats stats = corpus_stats({}, {}, {});
  CHECK(stats.categories.size() == 7);
  for (const auto& c : stats.categories) {
    CHECK(c.reports == 0);
    CHECK(c.mean_pages == 0.0);
  }
  CHECK(stats.banks.total() == 0);
}

TEST_CASE("bank crosstab reproduces the regional row of the bank sample") {
  std::vector<BankRecord> banks;
  for (int i = 0; i < 23; ++i) banks.push_back({"L" + std::to_string(i), "", Region::Europe, 700e9});
  for (int i = 0; i < 26; ++i) banks.push_back({"M" + std::to_string(i), "", Region::Europe, 100e9});
  for (int i = 0; i < 17; ++i) banks.push_back({"S" + std::to_string(i), "", Region::Europe, 10e9});
  const CorpusStats stats = corpus_stats({}, {}, banks);
  CHECK(stats.banks.at(Region::Europe, SizeClass::Large) == 23);
  CHECK(stats.banks.at(Region::Europe, SizeClass::Medium) == 26);
  CHECK(stats.banks.at(Region::Europe, SizeClass::Small) == 17);
  CHECK(stats.banks.row_total(Region::Europe) == 66);
}

TEST_CASE("bank registry fixture marginals") {
  const auto banks = io::parse_registry(io::read_text(data_path("table1/registry.tsv")));
  const RegionSizeTable t = corpus_stats({}, {}, banks).banks;
  CHECK(t.row_total(Region::AsiaPacific) == 90);
  CHECK(t.row_total(Region::Europe) == 66);
  CHECK(t.row_total(Region::LatinAmerica) == 7);
  CHECK(t.row_total(Region::MiddleEastAfrica) == 5);
  CHECK(t.row_total(Region::NorthAmerica) == 20);
  CHECK(t.column_total(SizeClass::Large) == 47);
  CHECK(t.column_total(SizeClass::Medium) == 92);
  CHECK(t.column_total(SizeClass::Small) == 49);
  CHECK(t.total() == 188);
  std::size_t rows = 0;
  std::size_t cols = 0;
  for (Region r : kRegions) rows += t.row_total(r);
  for (SizeClass s : kSizeClasses) cols += t.column_total(s);
  CHECK(rows == cols);
  CHECK(rows == banks.size());
}

TEST_CASE("enum parsing rejects unknown values") {
  CHECK(parse_region("Europe") == Region::Europe);
  CHECK(parse_report_category("CDP") == ReportCategory::CDP);
  CHECK(parse_block_tag("Abstract") == BlockTag::Abstract);
  CHECK_THROWS_AS(parse_region("Mars"), ParseError);
  CHECK_THROWS_AS(parse_report_category("Memo"), ParseError);
}

}
