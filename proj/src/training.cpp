#include "wordseg/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <unordered_map>

#include "wordseg/metrics.hpp"
#include "wordseg/rng.hpp"

namespace wordseg {

const char* strategy_name(UpdateStrategy s) {
  switch (s) {
    case UpdateStrategy::standard: return "standard";
    case UpdateStrategy::early: return "early";
    case UpdateStrategy::laso: return "laso";
  }
  return "?";
}

UpdateStrategy strategy_from_name(const std::string& name) {
  if (name == "standard") return UpdateStrategy::standard;
  if (name == "early") return UpdateStrategy::early;
  if (name == "laso") return UpdateStrategy::laso;
  throw ContractError("unknown update strategy \"" + name + "\"");
}

void TrainConfig::validate() const {
  if (mu < 0.0) throw ContractError("margin discount must be >= 0");
  if (beam_size < 1) throw ContractError("beam size must be >= 1");
  if (lr0 <= 0.0) throw ContractError("learning rate must be > 0");
  if (gamma < 0.0) throw ContractError("gamma must be >= 0");
  if (shortlist_fraction < 0.0 || shortlist_fraction > 1.0) {
    throw ContractError("shortlist fraction outside [0, 1]");
  }
  if (dev_fraction < 0.0 || dev_fraction > 1.0) throw ContractError("dev fraction outside [0, 1]");
  if (unk_replace_prob < 0.0 || unk_replace_prob > 1.0) {
    throw ContractError("unk replacement probability outside [0, 1]");
  }
  if (max_epochs < 1) throw ContractError("max_epochs must be >= 1");
}

int margin_delta(const Segmentation& hyp, const Segmentation& gold) {
  int n = 0;
  for (int len : hyp) n += len;
  int gn = 0;
  for (int len : gold) gn += len;
  if (n != gn) {
    throw ContractError("margin_delta: segmentations cover " + std::to_string(n) + " vs " +
                        std::to_string(gn) + " characters");
  }
  // span (start, end) containing each character, for both segmentations
  auto char_spans = [n](const Segmentation& seg) {
    std::vector<std::pair<int, int>> spans(n);
    int pos = 0;
    for (int len : seg) {
      for (int i = pos; i < pos + len; ++i) spans[i] = {pos, pos + len};
      pos += len;
    }
    return spans;
  };
  const auto hs = char_spans(hyp);
  const auto gs = char_spans(gold);
  int wrong = 0;
  for (int i = 0; i < n; ++i) {
    if (hs[i] != gs[i]) ++wrong;
  }
  return wrong;
}

double lr_schedule(int epoch, double lr0, double gamma) {
  if (epoch < 0) throw ContractError("lr_schedule: epoch must be >= 0");
  return lr0 / (1.0 + gamma * epoch);
}

int apply_long_word_policy(Segmentation& gold, int max_word_len) {
  Segmentation out;
  out.reserve(gold.size());
  int altered = 0;
  for (int len : gold) {
    if (len <= max_word_len) {
      out.push_back(len);
      continue;
    }
    ++altered;
    int rest = len;
    while (rest > max_word_len) {
      out.push_back(max_word_len);
      rest -= max_word_len;
    }
    if (rest > 0) out.push_back(rest);
  }
  gold = std::move(out);
  return altered;
}

namespace {

// Untraced scores and states of the gold path at every gold boundary
// (boundary 0 = sentence start).
struct GoldRollout {
  std::vector<int> boundaries;  // 0, end of word 1, ..., n
  std::unordered_map<int, StepState> state_at;
  std::unordered_map<int, double> cum_at;
};

GoldRollout roll_gold(const ModelParams& m, std::span<const int> ids, const Segmentation& gold,
                      const SpanShortlistIds& sl) {
  GoldRollout r;
  StepState state = init_decoder_state(m, nullptr);
  double cum = 0.0;
  int pos = 0;
  r.boundaries.push_back(0);
  r.state_at.emplace(0, state);
  r.cum_at.emplace(0, 0.0);
  for (int len : gold) {
    const Val wv = word_repr(m, ids.subspan(pos, len), sl.at(pos, len), nullptr);
    cum += ops::scalar(nullptr, step_score(m, state, wv, nullptr));
    state = advance(m, state, wv, nullptr);
    pos += len;
    r.boundaries.push_back(pos);
    r.state_at.emplace(pos, state);
    r.cum_at.emplace(pos, cum);
  }
  return r;
}

// Score of `path` starting at `start_pos` from `state`, traced or not.
Val path_score_from(const ModelParams& m, std::span<const int> ids, const SpanShortlistIds& sl,
                    int start_pos, StepState state, const Segmentation& path, Tape* t) {
  Val total;
  bool have = false;
  int pos = start_pos;
  for (std::size_t w = 0; w < path.size(); ++w) {
    const int len = path[w];
    const Val wv = word_repr(m, ids.subspan(pos, len), sl.at(pos, len), t);
    const Val sc = step_score(m, state, wv, t);
    total = have ? ops::add(t, total, sc) : sc;
    have = true;
    if (w + 1 < path.size()) state = advance(m, state, wv, t);
    pos += len;
  }
  if (!have) total = ops::leaf(t, Tensor::scalar(0.0));
  return total;
}

// Builds the summed hinge on a tape, runs backward, harvests gradients, and
// returns the traced loss value.
double backprop_hinges(const ModelParams& m, const TrainSentence& s, double mu,
                       std::span<const Violation> violations, ParamGrads& grads) {
  Tape tape;
  std::span<const int> ids(s.ids);

  int max_pos = 0;
  for (const Violation& v : violations) max_pos = std::max(max_pos, v.pos);

  // Traced gold prefix with per-boundary snapshots.
  std::unordered_map<int, StepState> state_at;
  std::unordered_map<int, Val> cum_at;
  {
    StepState state = init_decoder_state(m, &tape);
    Val cum = tape.constant(0.0);
    int pos = 0;
    state_at.emplace(0, state);
    cum_at.emplace(0, cum);
    for (int len : s.gold) {
      if (pos >= max_pos) break;
      const Val wv = word_repr(m, ids.subspan(pos, len), s.sl.at(pos, len), &tape);
      cum = tape.add(cum, step_score(m, state, wv, &tape));
      state = advance(m, state, wv, &tape);
      pos += len;
      state_at.emplace(pos, state);
      cum_at.emplace(pos, cum);
    }
  }

  Val total;
  bool have = false;
  for (const Violation& v : violations) {
    const Val suffix =
        path_score_from(m, ids, s.sl, v.floor, state_at.at(v.floor), v.path, &tape);
    Val hinge = tape.add(suffix, tape.constant(mu * v.margin_chars));
    hinge = tape.sub(hinge, tape.sub(cum_at.at(v.pos), cum_at.at(v.floor)));
    total = have ? tape.add(total, hinge) : hinge;
    have = true;
  }
  tape.backward(total);
  grads.accumulate(tape, m);
  return ops::scalar(&tape, total);
}

}  // namespace

double frozen_hinge_loss(const ModelParams& m, const TrainSentence& s, double mu,
                         std::span<const Violation> violations) {
  const GoldRollout gold = roll_gold(m, s.ids, s.gold, s.sl);
  double total = 0.0;
  for (const Violation& v : violations) {
    const Val suffix =
        path_score_from(m, s.ids, s.sl, v.floor, gold.state_at.at(v.floor), v.path, nullptr);
    total += ops::scalar(nullptr, suffix) + mu * v.margin_chars -
             (gold.cum_at.at(v.pos) - gold.cum_at.at(v.floor));
  }
  return total;
}

SentenceLoss sentence_loss_standard(const ModelParams& m, const TrainSentence& s,
                                    const TrainConfig& cfg, ParamGrads* grads) {
  const int n = static_cast<int>(s.ids.size());
  const GoldSpanSet gold_spans = GoldSpanSet::from_lengths(s.gold, n);
  const MarginSpec margin{cfg.mu, &gold_spans};
  const DecodeResult hyp = decode(m, s.ids, s.sl, cfg.beam_size, &margin);

  SentenceLoss out;
  out.stop_pos = n;
  if (hyp.seg == s.gold) return out;  // hinge is exactly zero

  const GoldRollout gold = roll_gold(m, s.ids, s.gold, s.sl);
  const double value = hyp.score - gold.cum_at.at(n);
  if (value <= 0.0) return out;

  out.violations.push_back({n, 0, hyp.seg, hyp.margin_chars, value});
  out.updates = 1;
  out.loss = value;
  if (grads) out.loss = backprop_hinges(m, s, cfg.mu, out.violations, *grads);
  return out;
}

SentenceLoss sentence_loss_early(const ModelParams& m, const TrainSentence& s,
                                 const TrainConfig& cfg, ParamGrads* grads) {
  const int n = static_cast<int>(s.ids.size());
  const GoldSpanSet gold_spans = GoldSpanSet::from_lengths(s.gold, n);
  const MarginSpec margin{cfg.mu, &gold_spans};
  const GoldRollout gold = roll_gold(m, s.ids, s.gold, s.sl);

  BeamRun run(m, s.ids, s.sl, cfg.beam_size, &margin);
  SentenceLoss out;
  while (!run.done()) {
    const int j = run.step();
    if (!gold_spans.is_boundary(j)) continue;
    if (run.gold_in_beam()) continue;

    // Gold fell off: hinge against the best prefix hypothesis, rest ignored.
    out.stop_pos = j;
    const std::int32_t best = run.beam().front();
    const double value = run.hyp(best).score - gold.cum_at.at(j);
    if (value > 0.0) {
      out.violations.push_back(
          {j, 0, run.path_from_floor(best), run.hyp(best).margin_chars, value});
      out.updates = 1;
      out.loss = value;
      if (grads) out.loss = backprop_hinges(m, s, cfg.mu, out.violations, *grads);
    }
    return out;
  }

  // Gold survived the whole beam: standard full-sentence hinge.
  out.stop_pos = n;
  const std::int32_t best = run.beam().front();
  const Segmentation best_path = run.path_from_floor(best);
  if (best_path == s.gold) return out;
  const double value = run.hyp(best).score - gold.cum_at.at(n);
  if (value <= 0.0) return out;
  out.violations.push_back({n, 0, best_path, run.hyp(best).margin_chars, value});
  out.updates = 1;
  out.loss = value;
  if (grads) out.loss = backprop_hinges(m, s, cfg.mu, out.violations, *grads);
  return out;
}

SentenceLoss sentence_loss_laso(const ModelParams& m, const TrainSentence& s,
                                const TrainConfig& cfg, ParamGrads* grads, SearchTrace* trace) {
  const int n = static_cast<int>(s.ids.size());
  const GoldSpanSet gold_spans = GoldSpanSet::from_lengths(s.gold, n);
  const MarginSpec margin{cfg.mu, &gold_spans};
  const GoldRollout gold = roll_gold(m, s.ids, s.gold, s.sl);

  BeamRun run(m, s.ids, s.sl, cfg.beam_size, &margin, trace);
  SentenceLoss out;
  out.stop_pos = n;
  while (!run.done()) {
    const int j = run.step();
    if (!gold_spans.is_boundary(j)) continue;
    if (run.gold_in_beam()) continue;

    const std::int32_t best = run.beam().front();
    const double value = run.hyp(best).score - gold.cum_at.at(j);
    if (value > 0.0) {
      out.violations.push_back(
          {j, run.floor(), run.path_from_floor(best), run.hyp(best).margin_chars, value});
    }
    // Empty the beam and insert the gold prefix, then keep decoding.
    run.reset_to_gold(gold.state_at.at(j), gold.cum_at.at(j));
  }

  const std::int32_t best = run.beam().front();
  if (!run.hyp(best).on_gold) {
    const double value = run.hyp(best).score - gold.cum_at.at(n);
    if (value > 0.0) {
      out.violations.push_back(
          {n, run.floor(), run.path_from_floor(best), run.hyp(best).margin_chars, value});
    }
  }

  out.updates = static_cast<int>(out.violations.size());
  for (const Violation& v : out.violations) out.loss += v.value;
  if (grads && !out.violations.empty()) {
    out.loss = backprop_hinges(m, s, cfg.mu, out.violations, *grads);
  }
  return out;
}

// ----- training loop -----

namespace {

std::unordered_set<std::string> collect_words(const Corpus& c) {
  std::unordered_set<std::string> words;
  words.reserve(c.word_freq.size());
  for (const auto& [w, f] : c.word_freq) words.insert(w);
  return words;
}

}  // namespace

TrainedModel train(const TrainConfig& cfg, const Corpus& train_corpus, const Corpus& dev_corpus,
                   const PretrainedChars* pretrained, const EpochCallback& on_epoch) {
  cfg.validate();
  if (train_corpus.sentences.empty()) throw ContractError("train: empty training corpus");

  TrainedModel out;
  out.vocab = build_char_vocab(train_corpus, cfg.unk_threshold);
  out.shortlist = build_short_list(train_corpus, cfg.shortlist_fraction);
  out.train_words = collect_words(train_corpus);
  out.params =
      init_params(cfg.dims, out.vocab.size(), out.shortlist.size(), cfg.seed, pretrained);

  // Per-sentence preparation: encoded characters, long-word policy on gold,
  // span short-list table.
  std::vector<TrainSentence> prepared;
  prepared.reserve(train_corpus.sentences.size());
  for (const Sentence& sent : train_corpus.sentences) {
    TrainSentence ts;
    ts.ids = out.vocab.encode(sent);
    ts.gold = sent.gold_segmentation();
    out.report.altered_gold_words += apply_long_word_policy(ts.gold, cfg.dims.max_word_len);
    ts.sl = SpanShortlistIds::build(sent, out.shortlist, cfg.dims.max_word_len);
    prepared.push_back(std::move(ts));
  }

  Rng rng(cfg.seed);
  ParamGrads grads;
  grads.init(out.params);

  ModelParams best_params = out.params;
  double best_f1 = -1.0;
  int best_epoch = -1;
  int no_improve = 0;

  std::vector<std::size_t> order(prepared.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainSentence scratch;
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const double lr = lr_schedule(epoch, cfg.lr0, cfg.gamma);
    rng.shuffle(order);

    double loss_sum = 0.0;
    std::uint64_t updates = 0;
    double stop_fraction_sum = 0.0;

    for (std::size_t idx : order) {
      const TrainSentence& base = prepared[idx];
      const TrainSentence* active = &base;
      // Stochastic UNK replacement of rare characters, fresh draws per epoch.
      if (cfg.unk_replace_prob > 0.0) {
        bool replaced = false;
        for (std::size_t i = 0; i < base.ids.size(); ++i) {
          if (!out.vocab.rare(base.ids[i])) continue;
          if (rng.uniform() < cfg.unk_replace_prob) {
            if (!replaced) {
              scratch.ids = base.ids;
              replaced = true;
            }
            scratch.ids[i] = CharVocab::kUnkId;
          }
        }
        if (replaced) {
          scratch.gold = base.gold;
          scratch.sl = base.sl;
          active = &scratch;
        }
      }

      grads.zero();
      SentenceLoss loss;
      switch (cfg.strategy) {
        case UpdateStrategy::standard:
          loss = sentence_loss_standard(out.params, *active, cfg, &grads);
          break;
        case UpdateStrategy::early:
          loss = sentence_loss_early(out.params, *active, cfg, &grads);
          break;
        case UpdateStrategy::laso:
          loss = sentence_loss_laso(out.params, *active, cfg, &grads);
          break;
      }
      loss_sum += loss.loss;
      stop_fraction_sum +=
          active->ids.empty() ? 1.0 : static_cast<double>(loss.stop_pos) / active->ids.size();
      if (loss.loss > 0.0) {
        sgd_step(out.params, grads, lr, cfg.grad_clip_norm);
        ++updates;
      }
    }

    const SegMetrics dev = evaluate_corpus(out.params, out.vocab, out.shortlist, dev_corpus,
                                           cfg.beam_size, &out.train_words);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    rec.dev_precision = dev.precision;
    rec.dev_recall = dev.recall;
    rec.dev_f1 = dev.f1;
    rec.dev_oov_recall = dev.oov_recall;
    rec.mean_loss = prepared.empty() ? 0.0 : loss_sum / static_cast<double>(prepared.size());
    rec.updates = updates;
    rec.mean_stop_fraction =
        prepared.empty() ? 1.0 : stop_fraction_sum / static_cast<double>(prepared.size());
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.report.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (dev.f1 > best_f1) {
      best_f1 = dev.f1;
      best_epoch = epoch;
      best_params = out.params;
      no_improve = 0;
    } else {
      ++no_improve;
      if (no_improve >= std::max(cfg.patience, 1)) break;
    }
  }

  out.params = std::move(best_params);
  out.report.best_epoch = best_epoch;
  return out;
}

}  // namespace wordseg
