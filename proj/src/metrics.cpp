#include "wordseg/metrics.hpp"

#include <algorithm>
#include <chrono>

#include "wordseg/scorer.hpp"
#include "wordseg/search.hpp"

namespace wordseg {

std::vector<std::pair<std::int32_t, std::int32_t>> word_spans(const Segmentation& seg, int n) {
  return spans_from_lengths(seg, n);
}

PrfCounts prf_counts(const Segmentation& gold, const Segmentation& pred) {
  int n = 0;
  for (int len : gold) n += len;
  int pn = 0;
  for (int len : pred) pn += len;
  if (n != pn) {
    throw ContractError("prf: segmentations cover " + std::to_string(n) + " vs " +
                        std::to_string(pn) + " characters");
  }
  const auto gs = spans_from_lengths(gold, n);
  const auto ps = spans_from_lengths(pred, n);
  PrfCounts c;
  c.gold = gs.size();
  c.pred = ps.size();
  // both sorted by start; count common spans with a merge walk
  std::size_t i = 0, j = 0;
  while (i < gs.size() && j < ps.size()) {
    if (gs[i] == ps[j]) {
      ++c.correct;
      ++i;
      ++j;
    } else if (gs[i].first < ps[j].first ||
               (gs[i].first == ps[j].first && gs[i].second < ps[j].second)) {
      ++i;
    } else {
      ++j;
    }
  }
  return c;
}

Prf prf_from_counts(const PrfCounts& c) {
  Prf m;
  m.precision = c.pred > 0 ? static_cast<double>(c.correct) / c.pred : 0.0;
  m.recall = c.gold > 0 ? static_cast<double>(c.correct) / c.gold : 0.0;
  m.f1 = (m.precision + m.recall) > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

Prf prf(const Segmentation& gold, const Segmentation& pred) {
  return prf_from_counts(prf_counts(gold, pred));
}

namespace {

struct OovCounts {
  std::uint64_t gold = 0;
  std::uint64_t correct = 0;
};

OovCounts oov_counts(const Sentence& s, const Segmentation& gold, const Segmentation& pred,
                     const std::unordered_set<std::string>& train_words) {
  const int n = s.size();
  const auto gs = spans_from_lengths(gold, n);
  const auto ps = spans_from_lengths(pred, n);
  OovCounts c;
  std::size_t j = 0;
  for (const auto& span : gs) {
    const std::string word(s.span_str(span.first, span.second));
    if (train_words.count(word)) continue;
    ++c.gold;
    while (j < ps.size() && ps[j].first < span.first) ++j;
    bool found = false;
    for (std::size_t k = j; k < ps.size() && ps[k].first <= span.first; ++k) {
      if (ps[k] == span) {
        found = true;
        break;
      }
    }
    if (found) ++c.correct;
  }
  return c;
}

}  // namespace

double oov_recall(const Sentence& s, const Segmentation& gold, const Segmentation& pred,
                  const std::unordered_set<std::string>& train_words) {
  const OovCounts c = oov_counts(s, gold, pred, train_words);
  return c.gold == 0 ? 1.0 : static_cast<double>(c.correct) / c.gold;
}

SegMetrics evaluate_corpus(const ModelParams& m, const CharVocab& vocab, const ShortList& sl,
                           const Corpus& corpus, int beam_size,
                           const std::unordered_set<std::string>* train_words, bool oracle) {
  SegMetrics out;
  PrfCounts totals;
  const auto t0 = std::chrono::steady_clock::now();
  for (const Sentence& sent : corpus.sentences) {
    if (sent.size() == 0) continue;
    const Segmentation gold = sent.gold_segmentation();
    Segmentation pred;
    if (oracle) {
      pred = gold;
    } else {
      const std::vector<int> ids = vocab.encode(sent);
      const SpanShortlistIds table = SpanShortlistIds::build(sent, sl, m.dims.max_word_len);
      pred = decode(m, ids, table, beam_size).seg;
    }
    totals.add(prf_counts(gold, pred));
    if (train_words) {
      const OovCounts oc = oov_counts(sent, gold, pred, *train_words);
      out.oov_gold_words += oc.gold;
      out.oov_correct_words += oc.correct;
    }
    ++out.sentences;
    out.characters += sent.size();
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  out.gold_words = totals.gold;
  out.pred_words = totals.pred;
  out.correct_words = totals.correct;
  const Prf p = prf_from_counts(totals);
  out.precision = p.precision;
  out.recall = p.recall;
  out.f1 = p.f1;
  out.oov_recall =
      out.oov_gold_words == 0 ? 1.0
                              : static_cast<double>(out.oov_correct_words) / out.oov_gold_words;
  return out;
}

}  // namespace wordseg
