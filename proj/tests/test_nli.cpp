#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "doctest.h"
#include "support/gen.hpp"
#include "tcfd/nli.hpp"
#include "tcfd/taxonomy.hpp"

using namespace tcfd;

namespace {

/// Backend driven by a function of the hypothesis text.
class ScriptedScorer final : public ScorerBackend {
 public:
  using Fn = std::function<NliScores(std::string_view premise, std::string_view hypothesis)>;
  explicit ScriptedScorer(Fn fn, std::size_t max_premise = 1024) : fn_(std::move(fn)), max_premise_(max_premise) {}
  std::string identity() const override { return "scripted"; }
  std::size_t max_premise_tokens() const override { return max_premise_; }
  std::size_t max_hypothesis_tokens() const override { return 256; }
  NliScores score(std::string_view p, std::string_view h) const override { return fn_(p, h); }

 private:
  Fn fn_;
  std::size_t max_premise_;
};

TextSequence seq(std::string id, std::string text) { return {std::move(id), "R", 0, std::move(text), 0}; }

double p_of(const std::vector<LabelProbability>& probs, const std::string& code) {
  for (const auto& lp : probs) {
    if (lp.label_code == code) return lp.p;
  }
  throw std::out_of_range(code);
}

LabelSet two_labels() {
  return LabelSet({{"A", Pillar::Strategy, Granularity::Fine, "alpha"},
                   {"B", Pillar::Strategy, Granularity::Fine, "beta"}},
                  "two");
}

}  // namespace

TEST_SUITE("nli") {

TEST_CASE("entailment_probability examples") {
  CHECK(entailment_probability({0, 0, 123}) == 0.5);
  CHECK(entailment_probability({2, 0, 5}) == doctest::Approx(testgen::naive_entailment(2, 0)).epsilon(1e-12));
  CHECK(entailment_probability({2, 0, 5}) == doctest::Approx(0.8808).epsilon(1e-4));
  CHECK(entailment_probability({-3, 3, 0}) == doctest::Approx(0.00247).epsilon(1e-3));
  CHECK(entailment_probability({-3, 3, 0}) == doctest::Approx(1.0 / (1.0 + std::exp(6.0))).epsilon(1e-12));
}

TEST_CASE("entailment_probability rejects non-finite logits") {
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(entailment_probability({inf, 0, 0}), DomainError);
  CHECK_THROWS_AS(entailment_probability({0, std::nan(""), 0}), DomainError);
}

TEST_CASE("entailment_probability is stable for large logits") {
  CHECK(entailment_probability({1e4, -1e4, 0}) == 1.0);
  CHECK(entailment_probability({-1e4, 1e4, 0}) == 0.0);
  CHECK(entailment_probability({1e4, 1e4, 0}) == 0.5);
}

TEST_CASE("entailment_probability properties over random logits") {
  testgen::Rng rng(42);
  for (int i = 0; i < 2000; ++i) {
    const NliScores s = testgen::logits(rng, 50);
    const double p = entailment_probability(s);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    CHECK(p + entailment_probability({s.contradiction, s.entailment, -s.neutral}) == doctest::Approx(1.0).epsilon(1e-12));
    const double k = testgen::uniform(rng, -100, 100);
    CHECK(entailment_probability({s.entailment + k, s.contradiction + k, s.neutral}) ==
          doctest::Approx(p).epsilon(1e-12));
    CHECK(entailment_probability({s.entailment, s.contradiction, s.neutral * 3 + 1}) == p);
    CHECK(p == doctest::Approx(testgen::naive_entailment(s.entailment, s.contradiction)).epsilon(1e-12));
  }
}

TEST_CASE("softmax") {
  const std::vector<double> v{1.0, 1.0};
  CHECK(softmax(v) == std::vector<double>{0.5, 0.5});
  CHECK(softmax(std::vector<double>{}).empty());
  const std::vector<double> big{1e4, 0, -1e4};
  const auto out = softmax(big);
  CHECK(out[0] == 1.0);
  CHECK(std::isfinite(out[2]));
}

TEST_CASE("lexical mock scorer") {
  SUBCASE("identical texts") {
    const NliScores s = lexical_mock_score("carbon emissions targets", "carbon emissions targets");
    CHECK(s.entailment == 6.0);
    CHECK(s.contradiction == -6.0);
    CHECK(s.neutral == 0.0);
    CHECK(entailment_probability(s) == doctest::Approx(1.0 / (1.0 + std::exp(-12.0))).epsilon(1e-12));
    CHECK(entailment_probability(s) > 0.99999);
  }
  SUBCASE("disjoint texts") {
    const NliScores s = lexical_mock_score("board oversight", "carbon emissions");
    CHECK(entailment_probability(s) == doctest::Approx(1.0 / (1.0 + std::exp(4.0))).epsilon(1e-12));
  }
  SUBCASE("empty texts") {
    CHECK(token_jaccard("", "") == 0.0);
    CHECK(entailment_probability(lexical_mock_score("", "")) == doctest::Approx(0.018).epsilon(1e-2));
  }
  SUBCASE("quarter overlap is the decision boundary") {
    // {a, b} vs {a, c, d}: one shared token out of four.
    CHECK(token_jaccard("alpha beta", "alpha gamma delta") == 0.25);
    CHECK(entailment_probability(lexical_mock_score("alpha beta", "alpha gamma delta")) == 0.5);
  }
}

TEST_CASE("classify with the mock backend") {
  const LabelSet labels = builtin_taxonomy();
  const LexicalMockScorer mock;
  const HypothesisTemplate tmpl;
  const auto probs = classify(seq("S1", "board oversight of climate risks"), labels, mock, tmpl);
  REQUIRE(probs.size() == 23);
  double sum = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    CHECK(probs[i].label_code == labels[i].code);
    CHECK(probs[i].sequence_id == "S1");
    CHECK(probs[i].p >= 0.0);
    CHECK(probs[i].p <= 1.0);
    sum += probs[i].p;
  }
  CHECK(std::abs(sum - 1.0) > 1e-3);
  CHECK(p_of(probs, "GO.1.1") > p_of(probs, "MT.1.3"));

  const auto again = classify(seq("S1", "board oversight of climate risks"), labels, mock, tmpl);
  for (std::size_t i = 0; i < probs.size(); ++i) CHECK(again[i].p == probs[i].p);
}

TEST_CASE("multi-label outputs are independent per label") {
  const LabelSet full = builtin_taxonomy();
  const LexicalMockScorer mock;
  const HypothesisTemplate tmpl;
  const TextSequence s = seq("S", "Processes to manage climate-related risks and emissions targets");
  const auto base = classify(s, full, mock, tmpl);

  std::vector<Label> reversed(full.labels().rbegin(), full.labels().rend());
  const auto rev = classify(s, LabelSet(reversed, full.version()), mock, tmpl);
  for (const auto& lp : base) CHECK(p_of(rev, lp.label_code) == lp.p);

  std::vector<Label> fewer;
  for (const Label& l : full) {
    if (l.code != "RM.1.1") fewer.push_back(l);
  }
  const auto sub = classify(s, LabelSet(fewer, full.version()), mock, tmpl);
  CHECK(sub.size() == 22);
  for (const auto& lp : sub) CHECK(p_of(base, lp.label_code) == lp.p);
}

TEST_CASE("classify_single_label") {
  const HypothesisTemplate tmpl("{}");
  const ScriptedScorer equal([](auto, auto) { return NliScores{1.5, 0, 0}; });
  const auto out = classify_single_label(seq("S", "text"), two_labels(), equal, tmpl);
  REQUIRE(out.size() == 2);
  CHECK(out[0].p == 0.5);
  CHECK(out[1].p == 0.5);

  const auto mock_out = classify_single_label(seq("S", "climate risk"), builtin_taxonomy(), LexicalMockScorer{},
                                              HypothesisTemplate{});
  double sum = 0;
  for (const auto& lp : mock_out) sum += lp.p;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("single-label and multi-label agree on argmax") {
  testgen::Rng rng(9);
  const std::size_t n_labels = 23;
  std::vector<Label> labels;
  for (std::size_t i = 0; i < n_labels; ++i) {
    labels.push_back({"L" + std::to_string(i), Pillar::Strategy, Granularity::Fine, "h" + std::to_string(i)});
  }
  const LabelSet set(labels, "t");
  const HypothesisTemplate tmpl("{}");
  for (int trial = 0; trial < 200; ++trial) {
    std::map<std::string, double> ent;
    // Bounded so that no probability rounds to exactly 1.0 and ties the argmax.
    for (const Label& l : labels) ent[l.description] = testgen::uniform(rng, -8, 8);
    const double contradiction = testgen::uniform(rng, -8, 8);
    const ScriptedScorer scorer([&](auto, std::string_view h) {
      return NliScores{ent.at(std::string(h)), contradiction, testgen::uniform(rng, -5, 5)};
    });
    const auto multi = classify(seq("S", "x"), set, scorer, tmpl);
    const auto single = classify_single_label(seq("S", "x"), set, scorer, tmpl);
    auto argmax = [](const std::vector<LabelProbability>& v) {
      return std::max_element(v.begin(), v.end(), [](auto& a, auto& b) { return a.p < b.p; })->label_code;
    };
    CHECK(argmax(multi) == argmax(single));
  }
}

TEST_CASE("classify truncates long premises with a warning") {
  std::string long_text;
  for (int i = 0; i < 20; ++i) long_text += "w" + std::to_string(i) + " ";
  std::size_t seen_words = 0;
  const ScriptedScorer scorer(
      [&](std::string_view premise, auto) {
        seen_words = std::count(premise.begin(), premise.end(), ' ') + 1;
        return NliScores{0, 0, 0};
      },
      5);
  std::vector<Warning> warnings;
  classify(seq("S9", long_text), two_labels(), scorer, HypothesisTemplate("{}"), &warnings);
  CHECK(seen_words == 5);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].subject == "S9");
}

TEST_CASE("backend failures become scoring errors") {
  const ScriptedScorer failing([](auto, std::string_view h) -> NliScores {
    if (h == "beta") throw std::runtime_error("device lost");
    return {0, 0, 0};
  });
  try {
    classify(seq("S3", "text"), two_labels(), failing, HypothesisTemplate("{}"));
    FAIL("expected ScoringError");
  } catch (const ScoringError& e) {
    CHECK(e.sequence_id() == "S3");
    CHECK(e.label_code() == "B");
  }
  const ScriptedScorer nan([](auto, auto) { return NliScores{std::nan(""), 0, 0}; });
  CHECK_THROWS_AS(classify(seq("S", "text"), two_labels(), nan, HypothesisTemplate("{}")), ScoringError);
  CHECK_THROWS_AS(classify(seq("S", "   "), two_labels(), LexicalMockScorer{}, HypothesisTemplate("{}")),
                  ConfigError);
}

TEST_CASE("hypothesis templates") {
  const LabelSet labels = builtin_taxonomy();
  const HypothesisTemplate plain;
  CHECK(plain.render(labels.lookup("GO.1")) == "This example is about Climate-related Governance.");
  const HypothesisTemplate split("This example is about {}.", "This text concerns {} in general.");
  CHECK(split.render(labels.lookup("GENERAL.STRATEGY")) == "This text concerns Strategy in general.");
  CHECK(split.render(labels.lookup("ST.1")) == "This example is about Climate-related Strategy.");
  CHECK(split.render(labels.lookup("NONE")) == hypothesis_for(labels.lookup("NONE"), "This example is about {}."));
  CHECK(split.hash() != plain.hash());
  CHECK(plain.hash() == HypothesisTemplate().hash());
  CHECK_THROWS_AS(HypothesisTemplate("no placeholder"), TemplateError);
  CHECK_THROWS_AS(HypothesisTemplate("{}", "{} {}"), TemplateError);
}

TEST_CASE("batch_classify") {
  const LabelSet labels = builtin_taxonomy();
  const LexicalMockScorer mock;
  const HypothesisTemplate tmpl;

  SUBCASE("cardinality and provenance") {
    std::vector<TextSequence> seqs{seq("a", "climate risk"), seq("b", "board"), seq("c", "emissions")};
    const BatchResult r = batch_classify(seqs, labels, mock, tmpl, {});
    CHECK(r.table.rows.size() == 69);
    CHECK(r.failures.empty());
    CHECK(r.table.provenance.backend == mock.identity());
    CHECK(r.table.provenance.template_hash == tmpl.hash());
    CHECK(r.table.provenance.taxonomy_version == labels.version());
    CHECK(r.table.rows[23].sequence_id == "b");
  }
  SUBCASE("empty input") {
    const BatchResult r = batch_classify(std::vector<TextSequence>{}, labels, mock, tmpl, {});
    CHECK(r.table.rows.empty());
    CHECK(r.table.provenance.backend == mock.identity());
  }
  SUBCASE("batch size and worker count do not change the table") {
    testgen::Rng rng(3);
    const std::array<std::string, 8> vocab{"climate", "board", "carbon", "risk", "bank", "targets", "credit",
                                           "scenario"};
    std::vector<TextSequence> seqs;
    for (int i = 0; i < 100; ++i) {
      std::string t;
      for (int w = 0; w < 6; ++w) t += vocab[testgen::index(rng, vocab.size())] + " ";
      seqs.push_back(seq("s" + std::to_string(i), t));
    }
    const BatchResult one = batch_classify(seqs, labels, mock, tmpl, {1, 1});
    const BatchResult big = batch_classify(seqs, labels, mock, tmpl, {64, 1});
    const BatchResult par = batch_classify(seqs, labels, mock, tmpl, {3, 8});
    CHECK(one.table.rows == big.table.rows);
    CHECK(one.table.rows == par.table.rows);
  }
  SUBCASE("failed sequences are reported and skipped") {
    std::vector<TextSequence> seqs{seq("ok", "climate"), seq("empty", " "), seq("ok2", "board")};
    const BatchResult r = batch_classify(seqs, labels, mock, tmpl, {2, 2});
    CHECK(r.table.rows.size() == 46);
    REQUIRE(r.failures.size() == 1);
    CHECK(r.failures[0].sequence_id == "empty");
  }
  CHECK_THROWS_AS(batch_classify(std::vector<TextSequence>{}, labels, mock, tmpl, {0, 1}), ConfigError);
}

}
