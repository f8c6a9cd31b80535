#include "tcfd/nli.hpp"

#include <algorithm>
#include <cmath>

#include "tcfd/parallel.hpp"
#include "tcfd/text.hpp"

namespace tcfd {

double entailment_probability(const NliScores& s) {
  if (!std::isfinite(s.entailment) || !std::isfinite(s.contradiction)) {
    throw DomainError("non-finite NLI logit");
  }
  const double m = std::max(s.entailment, s.contradiction);
  const double e = std::exp(s.entailment - m);
  const double c = std::exp(s.contradiction - m);
  return e / (e + c);
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  for (double v : logits) {
    if (!std::isfinite(v)) throw DomainError("non-finite logit in softmax");
  }
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

double token_jaccard(std::string_view a, std::string_view b) {
  const auto ta = text::content_tokens(a);
  const auto tb = text::content_tokens(b);
  if (ta.empty() && tb.empty()) return 0.0;
  std::size_t common = 0;
  for (const auto& t : ta) common += tb.count(t);
  const std::size_t uni = ta.size() + tb.size() - common;
  return static_cast<double>(common) / static_cast<double>(uni);
}

NliScores lexical_mock_score(std::string_view premise, std::string_view hypothesis) {
  const double e = 8.0 * token_jaccard(premise, hypothesis) - 2.0;
  return {e, -e, 0.0};
}

// ---------------------------------------------------------------------------

HypothesisTemplate::HypothesisTemplate(std::string text, std::optional<std::string> general)
    : text_(std::move(text)), general_(std::move(general)) {
  const Label probe{"probe", Pillar::None, Granularity::Fine, "x"};
  (void)hypothesis_for(probe, text_);
  if (general_) (void)hypothesis_for(probe, *general_);
}

std::string HypothesisTemplate::render(const Label& label) const {
  if (general_ && label.granularity == Granularity::General && label.code != kNoneCode) {
    return hypothesis_for(label, *general_);
  }
  return hypothesis_for(label, text_);
}

std::string HypothesisTemplate::hash() const {
  std::string key = text_;
  if (general_) key += '\x1f' + *general_;
  return text::fnv1a_hex(key);
}

namespace {

std::string limit_tokens(std::string_view textv, std::size_t limit, const std::string& subject,
                         const char* what, std::vector<Warning>* warnings) {
  const std::size_t n = text::word_count(textv);
  if (n <= limit) return std::string(textv);
  if (warnings) {
    warnings->push_back({subject, std::string(what) + " truncated from " + std::to_string(n) +
                                      " to " + std::to_string(limit) + " tokens"});
  }
  return text::truncate_words(textv, limit);
}

std::vector<NliScores> score_all(const TextSequence& seq, const LabelSet& labels,
                                 const ScorerBackend& backend, const HypothesisTemplate& tmpl,
                                 std::vector<Warning>* warnings) {
  const std::string premise =
      limit_tokens(seq.text, backend.max_premise_tokens(), seq.sequence_id, "premise", warnings);
  std::vector<NliScores> out;
  out.reserve(labels.size());
  for (const Label& label : labels) {
    const std::string hypothesis = limit_tokens(
        tmpl.render(label), backend.max_hypothesis_tokens(), label.code, "hypothesis", warnings);
    NliScores s;
    try {
      s = backend.score(premise, hypothesis);
    } catch (const std::exception& e) {
      throw ScoringError(seq.sequence_id, label.code, e.what());
    }
    if (!std::isfinite(s.entailment) || !std::isfinite(s.contradiction) || !std::isfinite(s.neutral)) {
      throw ScoringError(seq.sequence_id, label.code, "backend returned a non-finite logit");
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace

std::vector<LabelProbability> classify(const TextSequence& sequence, const LabelSet& labels,
                                       const ScorerBackend& backend, const HypothesisTemplate& tmpl,
                                       std::vector<Warning>* warnings) {
  if (text::normalize_whitespace(sequence.text).empty()) {
    throw ConfigError("sequence '" + sequence.sequence_id + "' is empty");
  }
  const auto scores = score_all(sequence, labels, backend, tmpl, warnings);
  std::vector<LabelProbability> out;
  out.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out.push_back({sequence.sequence_id, labels[i].code, entailment_probability(scores[i])});
  }
  return out;
}

std::vector<LabelProbability> classify_single_label(const TextSequence& sequence,
                                                    const LabelSet& labels,
                                                    const ScorerBackend& backend,
                                                    const HypothesisTemplate& tmpl,
                                                    std::vector<Warning>* warnings) {
  if (text::normalize_whitespace(sequence.text).empty()) {
    throw ConfigError("sequence '" + sequence.sequence_id + "' is empty");
  }
  const auto scores = score_all(sequence, labels, backend, tmpl, warnings);
  std::vector<double> logits;
  logits.reserve(scores.size());
  for (const NliScores& s : scores) logits.push_back(s.entailment);
  const std::vector<double> probs = softmax(logits);
  std::vector<LabelProbability> out;
  out.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out.push_back({sequence.sequence_id, labels[i].code, probs[i]});
  }
  return out;
}

BatchResult batch_classify(std::span<const TextSequence> sequences, const LabelSet& labels,
                           const ScorerBackend& backend, const HypothesisTemplate& tmpl,
                           const BatchOptions& options) {
  if (options.batch_size == 0) throw ConfigError("batch size must be at least 1");
  const std::size_t n_batches = (sequences.size() + options.batch_size - 1) / options.batch_size;

  struct Slot {
    std::vector<ProbabilityRow> rows;
    std::vector<BatchFailure> failures;
    std::vector<Warning> warnings;
  };
  std::vector<Slot> slots(n_batches);
  parallel_for(n_batches, options.workers, [&](std::size_t b) {
    Slot& slot = slots[b];
    const std::size_t begin = b * options.batch_size;
    const std::size_t end = std::min(sequences.size(), begin + options.batch_size);
    for (std::size_t i = begin; i < end; ++i) {
      const TextSequence& seq = sequences[i];
      std::vector<Warning> local;
      try {
        for (LabelProbability& lp : classify(seq, labels, backend, tmpl, &local)) {
          slot.rows.push_back({seq.sequence_id, seq.report_id, std::move(lp.label_code), lp.p});
        }
      } catch (const ScoringError& e) {
        slot.failures.push_back({e.sequence_id(), e.label_code(), e.what()});
      } catch (const Error& e) {
        slot.failures.push_back({seq.sequence_id, "", e.what()});
      }
      std::move(local.begin(), local.end(), std::back_inserter(slot.warnings));
    }
  });

  BatchResult result;
  result.table.provenance = {backend.identity(), tmpl.text(), tmpl.general().value_or(""),
                             tmpl.hash(), labels.version()};
  for (Slot& s : slots) {
    std::move(s.rows.begin(), s.rows.end(), std::back_inserter(result.table.rows));
    std::move(s.failures.begin(), s.failures.end(), std::back_inserter(result.failures));
    std::move(s.warnings.begin(), s.warnings.end(), std::back_inserter(result.warnings));
  }
  return result;
}

}  // namespace tcfd
