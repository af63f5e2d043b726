#pragma once

#include <span>
#include <vector>

#include "wordseg/autodiff.hpp"
#include "wordseg/corpus.hpp"
#include "wordseg/model.hpp"
#include "wordseg/segmentation.hpp"

namespace wordseg {

// Short-list ids for every span [start, start+len) of one sentence,
// -1 where the span is not a listed word. Built once per sentence.
class SpanShortlistIds {
 public:
  SpanShortlistIds() = default;
  static SpanShortlistIds build(const Sentence& s, const ShortList& sl, int max_word_len);
  static SpanShortlistIds none(int n, int max_word_len);

  int at(int start, int len) const {
    return ids_[static_cast<std::size_t>(start) * lmax_ + (len - 1)];
  }
  int length() const { return n_; }

 private:
  int n_ = 0;
  int lmax_ = 1;
  std::vector<int> ids_;
};

// Decoder state between words: recurrent state plus the prediction vector for
// the NEXT word.
struct StepState {
  Val h;
  Val c;
  Val prediction;  // tanh(W^p h + b^p), components in (-1, 1)
  int words_consumed = 0;
};

// Gated character composition: tanh(W^c_l [r1.*c1; ...; rl.*cl] + b^c_l) with
// [r1;...;rl] = sigmoid(W^r_l [c1;...;cl] + b^r_l).
Val compose_word(const ModelParams& m, std::span<const int> char_ids, Tape* t);

// Hybrid representation: average of composition and the word embedding when
// the word is short-listed (shortlist_id >= 0), composition alone otherwise.
Val word_repr(const ModelParams& m, std::span<const int> char_ids, int shortlist_id, Tape* t);

StepState init_decoder_state(const ModelParams& m, Tape* t);

// Feed a finished word into the LSTM and refresh the prediction.
StepState advance(const ModelParams& m, const StepState& s, const Val& word_vec, Tape* t);

// (u + p_i) . Word(w_i)
Val step_score(const ModelParams& m, const StepState& s, const Val& word_vec, Tape* t);

// Sum of step scores over the words of `seg`. Untraced unless `t` is given;
// when traced, *out holds the score node.
double score_sequence(const ModelParams& m, std::span<const int> char_ids, const Segmentation& seg,
                      const SpanShortlistIds& sl, Tape* t = nullptr, Val* out = nullptr);

}  // namespace wordseg
