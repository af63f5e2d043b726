#include "wordseg/scorer.hpp"

#include <array>

namespace wordseg {

SpanShortlistIds SpanShortlistIds::build(const Sentence& s, const ShortList& sl,
                                         int max_word_len) {
  SpanShortlistIds out;
  out.n_ = s.size();
  out.lmax_ = max_word_len;
  out.ids_.assign(static_cast<std::size_t>(out.n_) * max_word_len, -1);
  if (sl.size() == 0) return out;
  for (int start = 0; start < out.n_; ++start) {
    for (int len = 1; len <= max_word_len && start + len <= out.n_; ++len) {
      out.ids_[static_cast<std::size_t>(start) * max_word_len + (len - 1)] =
          sl.id_of(s.span_str(start, start + len));
    }
  }
  return out;
}

SpanShortlistIds SpanShortlistIds::none(int n, int max_word_len) {
  SpanShortlistIds out;
  out.n_ = n;
  out.lmax_ = max_word_len;
  out.ids_.assign(static_cast<std::size_t>(n) * max_word_len, -1);
  return out;
}

Val compose_word(const ModelParams& m, std::span<const int> char_ids, Tape* t) {
  const int l = static_cast<int>(char_ids.size());
  if (l < 1 || l > m.dims.max_word_len) {
    throw ContractError("compose_word: word length " + std::to_string(l) + " outside [1, " +
                        std::to_string(m.dims.max_word_len) + "]");
  }
  std::array<Val, 4> chars;
  for (int i = 0; i < l; ++i) {
    if (char_ids[i] < 0 || char_ids[i] >= m.vocab_size()) {
      throw ContractError("compose_word: character id " + std::to_string(char_ids[i]) +
                          " outside vocabulary of size " + std::to_string(m.vocab_size()));
    }
    chars[i] = ops::lookup_row(t, m.char_emb, char_ids[i]);
  }
  const Val stacked =
      l == 1 ? std::move(chars[0])
             : ops::concat(t, std::span<const Val>(chars.data(), static_cast<std::size_t>(l)));

  const Val gates = ops::sigmoid_fn(
      t, ops::affine(t, ops::param(t, m.gate_w[l - 1]), stacked, ops::param(t, m.gate_b[l - 1])));
  const Val gated = ops::hadamard(t, gates, stacked);
  return ops::tanh_fn(
      t, ops::affine(t, ops::param(t, m.comp_w[l - 1]), gated, ops::param(t, m.comp_b[l - 1])));
}

Val word_repr(const ModelParams& m, std::span<const int> char_ids, int shortlist_id, Tape* t) {
  Val comp = compose_word(m, char_ids, t);
  if (shortlist_id < 0) return comp;
  if (shortlist_id >= m.shortlist_size()) {
    throw ContractError("word_repr: short-list id " + std::to_string(shortlist_id) +
                        " outside table of size " + std::to_string(m.shortlist_size()));
  }
  const Val emb = ops::lookup_row(t, m.word_emb, shortlist_id);
  return ops::scale(t, ops::add(t, comp, emb), 0.5);
}

StepState init_decoder_state(const ModelParams& m, Tape* t) {
  StepState s;
  s.h = ops::param(t, m.h0);
  s.c = ops::param(t, m.c0);
  s.prediction =
      ops::tanh_fn(t, ops::affine(t, ops::param(t, m.pred_w), s.h, ops::param(t, m.pred_b)));
  s.words_consumed = 0;
  return s;
}

StepState advance(const ModelParams& m, const StepState& s, const Val& word_vec, Tape* t) {
  LstmState next = lstm_step(t, m.lstm, word_vec, LstmState{s.h, s.c});
  StepState out;
  out.h = std::move(next.h);
  out.c = std::move(next.c);
  out.prediction =
      ops::tanh_fn(t, ops::affine(t, ops::param(t, m.pred_w), out.h, ops::param(t, m.pred_b)));
  out.words_consumed = s.words_consumed + 1;
  return out;
}

Val step_score(const ModelParams& m, const StepState& s, const Val& word_vec, Tape* t) {
  return ops::dot_fn(t, ops::add(t, ops::param(t, m.legality), s.prediction), word_vec);
}

double score_sequence(const ModelParams& m, std::span<const int> char_ids, const Segmentation& seg,
                      const SpanShortlistIds& sl, Tape* t, Val* out) {
  const int n = static_cast<int>(char_ids.size());
  spans_from_lengths(seg, n);  // validates the partition
  if (sl.length() != n) {
    throw ContractError("score_sequence: short-list table covers " +
                        std::to_string(sl.length()) + " characters, sentence has " +
                        std::to_string(n));
  }

  if (seg.empty()) {
    if (out) *out = ops::leaf(t, Tensor::scalar(0.0));
    return 0.0;
  }

  StepState state = init_decoder_state(m, t);
  Val total;
  bool have_total = false;
  int pos = 0;
  for (std::size_t w = 0; w < seg.size(); ++w) {
    const int len = seg[w];
    if (len > m.dims.max_word_len) {
      throw ContractError("score_sequence: word length " + std::to_string(len) + " exceeds " +
                          std::to_string(m.dims.max_word_len));
    }
    const Val wv = word_repr(m, char_ids.subspan(pos, len), sl.at(pos, len), t);
    const Val sc = step_score(m, state, wv, t);
    total = have_total ? ops::add(t, total, sc) : sc;
    have_total = true;
    if (w + 1 < seg.size()) state = advance(m, state, wv, t);
    pos += len;
  }
  if (out) *out = total;
  return ops::scalar(t, total);
}

}  // namespace wordseg
