#pragma once

#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "wordseg/corpus.hpp"
#include "wordseg/model.hpp"
#include "wordseg/scorer.hpp"
#include "wordseg/search.hpp"

namespace wordseg {

enum class UpdateStrategy { standard, early, laso };

const char* strategy_name(UpdateStrategy s);
UpdateStrategy strategy_from_name(const std::string& name);

struct TrainConfig {
  ModelDims dims;
  double mu = 0.2;                 // margin loss discount
  int beam_size = 1;               // used for training and dev evaluation alike
  double lr0 = 0.2;                // eta_t = lr0 / (1 + gamma * t)
  double gamma = 0.1;
  int max_epochs = 50;
  int patience = 5;                // epochs without dev improvement before stopping
  UpdateStrategy strategy = UpdateStrategy::early;
  double shortlist_fraction = 0.5;
  std::uint64_t seed = 1;
  std::uint64_t unk_threshold = 1;
  double unk_replace_prob = 0.5;
  double grad_clip_norm = 5.0;
  double dev_fraction = 0.1;       // used by the pipeline-level dev split
  bool normalize_ascii = false;    // collapse ASCII digits/letters to class symbols

  void validate() const;
};

// Number of characters whose containing word span in hyp differs from their
// containing gold span. Both must partition the same length.
int margin_delta(const Segmentation& hyp, const Segmentation& gold);

// eta_t = lr0 / (1 + gamma * t), t counted from 0.
double lr_schedule(int epoch, double lr0, double gamma);

// One training sentence, prepared once: encoded characters, gold lengths
// (after the long-word policy) and the span short-list table.
struct TrainSentence {
  std::vector<int> ids;
  Segmentation gold;
  SpanShortlistIds sl;
};

// A hinge term produced by a search violation: best beam hypothesis at `pos`
// against the gold prefix ending there. `path` holds the hypothesis word
// lengths from `floor` (the last LaSO reset position, 0 otherwise).
struct Violation {
  int pos = 0;
  int floor = 0;
  Segmentation path;
  int margin_chars = 0;
  double value = 0.0;  // augmented-best minus gold-prefix score
};

struct SentenceLoss {
  double loss = 0.0;
  int stop_pos = 0;     // early update: first gold fall-off (n when none)
  int updates = 0;      // LaSO: number of hinge terms
  std::vector<Violation> violations;  // frozen structure, for gradient checking
};

// Margin hinge of the full-sentence argmax against gold.
SentenceLoss sentence_loss_standard(const ModelParams& m, const TrainSentence& s,
                                    const TrainConfig& cfg, ParamGrads* grads = nullptr);

// Stops at the first position where the gold prefix leaves the beam; the rest
// of the sentence is ignored. Falls back to the standard hinge when gold
// survives to the end.
SentenceLoss sentence_loss_early(const ModelParams& m, const TrainSentence& s,
                                 const TrainConfig& cfg, ParamGrads* grads = nullptr);

// After every violation the beam is reset to the gold prefix and decoding
// continues; all hinge terms are summed.
SentenceLoss sentence_loss_laso(const ModelParams& m, const TrainSentence& s,
                                const TrainConfig& cfg, ParamGrads* grads = nullptr,
                                SearchTrace* trace = nullptr);

// Loss value for a frozen set of violations at the current parameters (the
// decoded paths are treated as constants; used for finite differences).
double frozen_hinge_loss(const ModelParams& m, const TrainSentence& s, double mu,
                         std::span<const Violation> violations);

// Splits gold words longer than max_word_len into left-to-right chunks.
// Returns the number of words altered.
int apply_long_word_policy(Segmentation& gold, int max_word_len);

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double dev_precision = 0.0;
  double dev_recall = 0.0;
  double dev_f1 = 0.0;
  double dev_oov_recall = 0.0;
  double mean_loss = 0.0;
  std::uint64_t updates = 0;
  double mean_stop_fraction = 1.0;  // early update: stop_pos / n averaged over updates
  double seconds = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  int best_epoch = -1;
  std::uint64_t altered_gold_words = 0;
};

struct TrainedModel {
  ModelParams params;
  CharVocab vocab;
  ShortList shortlist;
  std::unordered_set<std::string> train_words;
  TrainReport report;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Full training loop: per-epoch seeded shuffle, per-sentence updates with the
// configured strategy, stochastic UNK replacement of rare characters, dev F1
// model selection with patience stopping.
TrainedModel train(const TrainConfig& cfg, const Corpus& train_corpus, const Corpus& dev_corpus,
                   const PretrainedChars* pretrained = nullptr,
                   const EpochCallback& on_epoch = nullptr);

}  // namespace wordseg
