#pragma once

#include <cstdint>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "wordseg/corpus.hpp"
#include "wordseg/model.hpp"
#include "wordseg/segmentation.hpp"

namespace wordseg {

struct SegMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double oov_recall = 1.0;
  std::uint64_t gold_words = 0;
  std::uint64_t pred_words = 0;
  std::uint64_t correct_words = 0;
  std::uint64_t oov_gold_words = 0;
  std::uint64_t oov_correct_words = 0;
  std::uint64_t sentences = 0;
  std::uint64_t characters = 0;
  double seconds = 0.0;
};

// Raw counts for micro-averaging.
struct PrfCounts {
  std::uint64_t correct = 0;
  std::uint64_t gold = 0;
  std::uint64_t pred = 0;

  void add(const PrfCounts& o) {
    correct += o.correct;
    gold += o.gold;
    pred += o.pred;
  }
};

std::vector<std::pair<std::int32_t, std::int32_t>> word_spans(const Segmentation& seg, int n);

PrfCounts prf_counts(const Segmentation& gold, const Segmentation& pred);

// (P, R, F1); F1 = 2PR/(P+R), 0 when P+R == 0.
struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};
Prf prf(const Segmentation& gold, const Segmentation& pred);
Prf prf_from_counts(const PrfCounts& c);

// Among gold words absent from `train_words`, the fraction also predicted.
// 1.0 by convention when the sentence has no OOV gold words.
double oov_recall(const Sentence& s, const Segmentation& gold, const Segmentation& pred,
                  const std::unordered_set<std::string>& train_words);

// Decodes every sentence at beam size k and micro-averages the counts.
// `train_words == nullptr` leaves OOV recall at its empty-denominator
// convention of 1.0. `oracle` bypasses decoding and predicts gold itself.
SegMetrics evaluate_corpus(const ModelParams& m, const CharVocab& vocab, const ShortList& sl,
                           const Corpus& corpus, int beam_size,
                           const std::unordered_set<std::string>* train_words = nullptr,
                           bool oracle = false);

}  // namespace wordseg
