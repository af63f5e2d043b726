#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_set>
#include <vector>

#include "wordseg/scorer.hpp"
#include "wordseg/segmentation.hpp"

namespace wordseg {

// Gold word spans of one sentence, with the per-word margin increment used by
// loss-augmented decoding: a word span identical to a gold span adds nothing,
// any other span adds its character count.
class GoldSpanSet {
 public:
  GoldSpanSet() = default;
  static GoldSpanSet from_lengths(const Segmentation& gold, int n);

  bool contains(int start, int end) const {
    return spans_.count((static_cast<std::uint64_t>(start) << 32) | static_cast<std::uint32_t>(end)) > 0;
  }
  int margin_increment(int start, int end) const {
    return contains(start, end) ? 0 : end - start;
  }
  // True iff `pos` ends a gold word (includes n).
  bool is_boundary(int pos) const { return boundaries_.count(pos) > 0; }
  int length() const { return n_; }

 private:
  std::unordered_set<std::uint64_t> spans_;
  std::unordered_set<int> boundaries_;
  int n_ = 0;
};

struct MarginSpec {
  double mu = 0.0;
  const GoldSpanSet* gold = nullptr;
};

struct SearchTrace {
  std::uint64_t expansions = 0;   // candidate extensions formed over the sentence
  bool record_beams = false;
  struct Position {
    int expansions = 0;
    std::vector<Segmentation> beam_paths;  // kept hypotheses, best first (when record_beams)
    std::vector<double> beam_scores;
  };
  std::vector<Position> positions;
};

// A partial segmentation during decoding.
struct Hypothesis {
  int end_pos = 0;
  double score = 0.0;      // cumulative, margin included when augmented
  int margin_chars = 0;    // incorrectly segmented characters accumulated so far
  StepState state;
  int last_word_len = 0;
  std::int32_t parent = -1;  // arena index, -1 for a root
  bool on_gold = false;      // path equals a gold prefix (tracked when gold given)
};

struct DecodeResult {
  Segmentation seg;
  double score = 0.0;        // augmented score when margin was active
  double model_score = 0.0;  // score minus the margin term
  int margin_chars = 0;
};

// Incremental beam search over character prefixes, driven position by
// position so training strategies can watch the gold hypothesis and reset the
// frontier (LaSO). Word representations are computed once per span and shared
// across hypotheses.
class BeamRun {
 public:
  BeamRun(const ModelParams& m, std::span<const int> chars, const SpanShortlistIds& sl,
          int beam_size, const MarginSpec* margin = nullptr, SearchTrace* trace = nullptr);

  // Extends all hypotheses into the next position and prunes to the beam
  // size. Returns the new position.
  int step();
  int pos() const { return pos_; }
  int length() const { return n_; }
  bool done() const { return pos_ >= n_; }

  // Beam at the current position, best first.
  std::span<const std::int32_t> beam() const { return beams_[pos_]; }
  const Hypothesis& hyp(std::int32_t idx) const { return arena_[idx]; }
  const Hypothesis& best() const { return arena_[beams_[pos_].front()]; }
  bool gold_in_beam() const;

  // Word lengths from the current floor to this hypothesis.
  Segmentation path_from_floor(std::int32_t idx) const;
  int floor() const { return floor_; }

  // LaSO reset: the current position's beam is replaced by the single gold
  // prefix hypothesis, earlier positions are cleared, and decoding continues
  // from here.
  void reset_to_gold(const StepState& gold_state, double gold_model_score);

 private:
  const ModelParams& m_;
  std::span<const int> chars_;
  const SpanShortlistIds& sl_;
  int k_;
  const MarginSpec* margin_;
  SearchTrace* trace_;
  int n_;
  int pos_ = 0;
  int floor_ = 0;

  std::vector<Hypothesis> arena_;
  std::vector<std::vector<std::int32_t>> beams_;  // per position, indices into arena
  std::vector<Val> word_cache_;                   // span -> word_repr, built lazily
  std::vector<std::uint8_t> word_cache_set_;

  const Val& word_vec(int start, int len);
};

// Beam decode; k = 1 degenerates to greedy search. Throws ContractError on
// empty input.
DecodeResult decode(const ModelParams& m, std::span<const int> chars, const SpanShortlistIds& sl,
                    int beam_size, const MarginSpec* margin = nullptr,
                    SearchTrace* trace = nullptr);

// Every composition of n into parts <= max_word_len, each exactly once.
// Guarded to n <= 12.
std::vector<Segmentation> enumerate_segmentations(int n, int max_word_len);

// Exhaustive argmax with the same tie-break as decode. Guarded to n <= 12.
std::pair<Segmentation, double> exact_decode(const ModelParams& m, std::span<const int> chars,
                                             const SpanShortlistIds& sl);

// Shared hypothesis ordering: higher score first, then shorter last word,
// then lexicographically smaller cut sequence.
bool segmentation_wins_tie(const Segmentation& a, const Segmentation& b);

}  // namespace wordseg
