#include "wordseg/search.hpp"

#include <algorithm>

namespace wordseg {

GoldSpanSet GoldSpanSet::from_lengths(const Segmentation& gold, int n) {
  GoldSpanSet g;
  g.n_ = n;
  for (auto [s, e] : spans_from_lengths(gold, n)) {
    g.spans_.insert((static_cast<std::uint64_t>(s) << 32) | static_cast<std::uint32_t>(e));
    g.boundaries_.insert(e);
  }
  return g;
}

bool segmentation_wins_tie(const Segmentation& a, const Segmentation& b) {
  // shorter last word first, then lexicographically smaller cut sequence
  if (a.back() != b.back()) return a.back() < b.back();
  const auto ca = cuts_from_lengths(a);
  const auto cb = cuts_from_lengths(b);
  return std::lexicographical_compare(ca.begin(), ca.end(), cb.begin(), cb.end());
}

BeamRun::BeamRun(const ModelParams& m, std::span<const int> chars, const SpanShortlistIds& sl,
                 int beam_size, const MarginSpec* margin, SearchTrace* trace)
    : m_(m),
      chars_(chars),
      sl_(sl),
      k_(beam_size),
      margin_(margin),
      trace_(trace),
      n_(static_cast<int>(chars.size())) {
  if (n_ < 1) throw ContractError("decode: empty input");
  if (k_ < 1) throw ContractError("decode: beam size " + std::to_string(k_) + " < 1");
  if (sl_.length() != n_) {
    throw ContractError("decode: short-list table covers " + std::to_string(sl_.length()) +
                        " characters, sentence has " + std::to_string(n_));
  }
  if (margin_ && margin_->gold && margin_->gold->length() != n_) {
    throw ContractError("decode: gold spans cover " + std::to_string(margin_->gold->length()) +
                        " characters, sentence has " + std::to_string(n_));
  }
  beams_.resize(n_ + 1);
  word_cache_.resize(static_cast<std::size_t>(n_) * m_.dims.max_word_len);
  word_cache_set_.assign(word_cache_.size(), 0);

  Hypothesis root;
  root.end_pos = 0;
  root.score = 0.0;
  root.state = init_decoder_state(m_, nullptr);
  root.on_gold = true;
  arena_.push_back(std::move(root));
  beams_[0].push_back(0);
  if (trace_) trace_->positions.resize(n_ + 1);
}

const Val& BeamRun::word_vec(int start, int len) {
  const std::size_t idx = static_cast<std::size_t>(start) * m_.dims.max_word_len + (len - 1);
  if (!word_cache_set_[idx]) {
    word_cache_[idx] =
        word_repr(m_, chars_.subspan(start, len), sl_.at(start, len), nullptr);
    word_cache_set_[idx] = 1;
  }
  return word_cache_[idx];
}

Segmentation BeamRun::path_from_floor(std::int32_t idx) const {
  Segmentation lengths;
  for (std::int32_t cur = idx; cur >= 0 && arena_[cur].last_word_len > 0;
       cur = arena_[cur].parent) {
    lengths.push_back(arena_[cur].last_word_len);
  }
  std::reverse(lengths.begin(), lengths.end());
  return lengths;
}

int BeamRun::step() {
  if (done()) throw ContractError("decode: stepped past the end of the sentence");
  const int j = pos_ + 1;

  // Candidate scores first; LSTM states only for the survivors.
  struct Candidate {
    std::int32_t parent;
    int len;
    double score;
    int margin_chars;
    bool on_gold;
  };
  std::vector<Candidate> cands;
  const int max_len = std::min(m_.dims.max_word_len, j);
  for (int len = 1; len <= max_len; ++len) {
    const int from = j - len;
    if (from < floor_ || beams_[from].empty()) continue;
    const Val& wv = word_vec(from, len);
    int inc = 0;
    double margin_bonus = 0.0;
    bool span_on_gold = false;
    if (margin_ && margin_->gold) {
      inc = margin_->gold->margin_increment(from, j);
      margin_bonus = margin_->mu * inc;
      span_on_gold = inc == 0 && margin_->gold->contains(from, j);
    }
    for (std::int32_t pidx : beams_[from]) {
      const Hypothesis& parent = arena_[pidx];
      const double sc =
          parent.score + ops::scalar(nullptr, step_score(m_, parent.state, wv, nullptr)) +
          margin_bonus;
      cands.push_back({pidx, len, sc, parent.margin_chars + inc,
                       parent.on_gold && span_on_gold});
      if (trace_) {
        ++trace_->expansions;
        ++trace_->positions[j].expansions;
      }
    }
  }

  // Rank candidates with the shared tie-break. Paths are only reconstructed
  // on exact score ties.
  std::vector<int> order(cands.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  auto cand_better = [&](int x, int y) {
    const Candidate& a = cands[x];
    const Candidate& b = cands[y];
    if (a.score != b.score) return a.score > b.score;
    if (a.len != b.len) return a.len < b.len;
    Segmentation pa = path_from_floor(a.parent);
    pa.push_back(a.len);
    Segmentation pb = path_from_floor(b.parent);
    pb.push_back(b.len);
    const auto ca = cuts_from_lengths(pa);
    const auto cb = cuts_from_lengths(pb);
    return std::lexicographical_compare(ca.begin(), ca.end(), cb.begin(), cb.end());
  };
  const std::size_t keep = std::min<std::size_t>(k_, order.size());
  std::partial_sort(order.begin(), order.begin() + keep, order.end(), cand_better);
  order.resize(keep);

  beams_[j].clear();
  for (int oi : order) {
    const Candidate& c = cands[oi];
    Hypothesis h;
    h.end_pos = j;
    h.score = c.score;
    h.margin_chars = c.margin_chars;
    h.last_word_len = c.len;
    h.parent = c.parent;
    h.on_gold = c.on_gold;
    h.state = advance(m_, arena_[c.parent].state, word_vec(j - c.len, c.len), nullptr);
    arena_.push_back(std::move(h));
    beams_[j].push_back(static_cast<std::int32_t>(arena_.size()) - 1);
  }

  pos_ = j;
  if (trace_ && trace_->record_beams) {
    auto& rec = trace_->positions[j];
    for (std::int32_t idx : beams_[j]) {
      rec.beam_paths.push_back(path_from_floor(idx));
      rec.beam_scores.push_back(arena_[idx].score);
    }
  }
  return pos_;
}

bool BeamRun::gold_in_beam() const {
  for (std::int32_t idx : beams_[pos_]) {
    if (arena_[idx].on_gold) return true;
  }
  return false;
}

void BeamRun::reset_to_gold(const StepState& gold_state, double gold_model_score) {
  for (int p = floor_; p <= pos_; ++p) beams_[p].clear();
  Hypothesis h;
  h.end_pos = pos_;
  h.score = gold_model_score;  // margin term of a gold prefix is zero
  h.margin_chars = 0;
  h.state = gold_state;
  h.last_word_len = 0;  // path restarts here
  h.parent = -1;
  h.on_gold = true;
  arena_.push_back(std::move(h));
  beams_[pos_].push_back(static_cast<std::int32_t>(arena_.size()) - 1);
  floor_ = pos_;
}

DecodeResult decode(const ModelParams& m, std::span<const int> chars, const SpanShortlistIds& sl,
                    int beam_size, const MarginSpec* margin, SearchTrace* trace) {
  BeamRun run(m, chars, sl, beam_size, margin, trace);
  while (!run.done()) run.step();
  const Hypothesis& best = run.best();
  DecodeResult out;
  out.seg = run.path_from_floor(run.beam().front());
  out.score = best.score;
  out.margin_chars = best.margin_chars;
  out.model_score = best.score - (margin ? margin->mu * best.margin_chars : 0.0);
  return out;
}

std::vector<Segmentation> enumerate_segmentations(int n, int max_word_len) {
  if (n < 0 || n > 12) {
    throw ContractError("enumerate_segmentations: n = " + std::to_string(n) +
                        " outside [0, 12]");
  }
  std::vector<Segmentation> out;
  Segmentation cur;
  auto rec = [&](auto&& self, int remaining) -> void {
    if (remaining == 0) {
      out.push_back(cur);
      return;
    }
    for (int len = 1; len <= std::min(max_word_len, remaining); ++len) {
      cur.push_back(len);
      self(self, remaining - len);
      cur.pop_back();
    }
  };
  if (n > 0) rec(rec, n);
  return out;
}

std::pair<Segmentation, double> exact_decode(const ModelParams& m, std::span<const int> chars,
                                             const SpanShortlistIds& sl) {
  const int n = static_cast<int>(chars.size());
  if (n < 1) throw ContractError("exact_decode: empty input");
  const auto all = enumerate_segmentations(n, m.dims.max_word_len);
  Segmentation best;
  double best_score = 0.0;
  for (const Segmentation& seg : all) {
    const double s = score_sequence(m, chars, seg, sl);
    if (best.empty() || s > best_score ||
        (s == best_score && segmentation_wins_tie(seg, best))) {
      best = seg;
      best_score = s;
    }
  }
  return {best, best_score};
}

}  // namespace wordseg
