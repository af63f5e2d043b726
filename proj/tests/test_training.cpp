#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "wordseg/corpus.hpp"
#include "wordseg/synthdata.hpp"
#include "wordseg/training.hpp"

using namespace wordseg;

namespace {

ModelParams tiny_model(std::uint64_t seed, int vocab = 14, int shortlist = 0) {
  ModelDims dims;
  dims.d_c = 6;
  dims.d_w = 6;
  dims.hidden = 6;
  dims.max_word_len = 4;
  ModelParams m = init_params(dims, vocab, shortlist, seed);
  oracle::randomize_params(m, seed * 17 + 5, 0.8);
  return m;
}

TrainConfig tiny_config() {
  TrainConfig cfg;
  cfg.dims = {6, 6, 6, 4};
  cfg.mu = 0.2;
  cfg.beam_size = 2;
  return cfg;
}

TrainSentence make_train_sentence(const std::vector<int>& ids, Segmentation gold) {
  TrainSentence s;
  s.ids = ids;
  s.gold = std::move(gold);
  s.sl = SpanShortlistIds::none(static_cast<int>(ids.size()), 4);
  return s;
}

bool params_equal(const ModelParams& a, const ModelParams& b) {
  bool equal = true;
  a.for_each_tensor([&](const std::string& name, const Tensor& t) {
    b.for_each_tensor([&](const std::string& name2, const Tensor& t2) {
      if (name != name2) return;
      for (std::size_t i = 0; i < t.numel(); ++i) equal = equal && t[i] == t2[i];
    });
  });
  return equal;
}

// Scalar model (d = 1) where character embeddings directly control word
// scores: Word(w) ~ tanh(sum of char values), u = 1, predictions 0. With
// A = 2, B = 1, "AB" scores tanh(3) < tanh(2) + tanh(1), so gold "AB|.."
// falls off a greedy beam at its first boundary.
struct Crafted {
  ModelParams m;
  // char ids: 1 = A(+2), 2 = B(+1), 3 = C(+2), 4 = D(+1), 5 = E(-2)
  Crafted() : m(init_params({1, 1, 1, 4}, 6, 0, 1)) {
    m.for_each_tensor([](const std::string&, Tensor& t) { t.fill(0.0); });
    m.char_emb.at(1, 0) = 2.0;
    m.char_emb.at(2, 0) = 1.0;
    m.char_emb.at(3, 0) = 2.0;
    m.char_emb.at(4, 0) = 1.0;
    m.char_emb.at(5, 0) = -2.0;
    for (int l = 1; l <= 4; ++l) {
      m.gate_b[l - 1].fill(40.0);  // gates saturate at 1: composition sees raw sums
      for (int c = 0; c < l; ++c) m.comp_w[l - 1].at(0, c) = 1.0;
    }
    m.legality[0] = 1.0;
  }
};

}  // namespace

TEST_CASE("margin_delta hand cases") {
  CHECK(margin_delta({2, 1}, {2, 1}) == 0);
  // gold AB|C vs hyp A|BC: all three characters sit in wrong spans
  CHECK(margin_delta({1, 2}, {2, 1}) == 3);
  // gold AB|CD vs hyp AB|C|D: AB right, C and D wrong
  CHECK(margin_delta({2, 1, 1}, {2, 2}) == 2);
  CHECK_THROWS_AS(margin_delta({2}, {3}), ContractError);
}

TEST_CASE("margin_delta bounds and separation") {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(12));
    const Segmentation a = oracle::random_segmentation(rng, n, 4);
    const Segmentation b = oracle::random_segmentation(rng, n, 4);
    const int d = margin_delta(a, b);
    CHECK(d >= 0);
    CHECK(d <= n);
    CHECK(margin_delta(a, a) == 0);
    if (a != b) CHECK(d > 0);
  }
}

TEST_CASE("learning-rate schedule") {
  CHECK(lr_schedule(0, 0.2, 0.1) == 0.2);
  CHECK(lr_schedule(10, 0.2, 0.1) == doctest::Approx(0.1));
  CHECK(lr_schedule(7, 0.35, 0.0) == 0.35);
  CHECK_THROWS_AS(lr_schedule(-1, 0.2, 0.1), ContractError);
}

TEST_CASE("sgd_step basics") {
  ModelParams m = tiny_model(1);
  ParamGrads g;
  g.init(m);

  SUBCASE("zero gradients leave parameters unchanged") {
    const ModelParams before = m;
    g.zero();
    sgd_step(m, g, 0.5, 5.0);
    CHECK(params_equal(before, m));
  }

  SUBCASE("zero learning rate leaves parameters unchanged") {
    const ModelParams before = m;
    g.zero();
    g.dense[0][0] = 123.0;
    sgd_step(m, g, 0.0, 0.0);
    CHECK(params_equal(before, m));
  }

  SUBCASE("single-coordinate arithmetic") {
    g.zero();
    auto tensors = m.dense_tensors();
    *tensors[0] = Tensor(tensors[0]->rows(), tensors[0]->cols());
    tensors[0]->at(0, 0) = 1.0;
    g.dense[0].at(0, 0) = 2.0;
    sgd_step(m, g, 0.1, 0.0);
    CHECK(tensors[0]->at(0, 0) == doctest::Approx(0.8));
  }

  SUBCASE("global norm clipping rescales") {
    g.zero();
    g.dense[0][0] = 30.0;
    g.dense[1][0] = 40.0;  // norm 50
    auto tensors = m.dense_tensors();
    const double a0 = (*tensors[0])[0];
    const double b0 = (*tensors[1])[0];
    sgd_step(m, g, 1.0, 5.0);  // scale = 0.1
    CHECK((*tensors[0])[0] == doctest::Approx(a0 - 3.0));
    CHECK((*tensors[1])[0] == doctest::Approx(b0 - 4.0));
  }
}

TEST_CASE("long-word policy splits left to right") {
  Segmentation gold = {2, 9, 1, 4};
  const int altered = apply_long_word_policy(gold, 4);
  CHECK(altered == 1);
  CHECK(gold == Segmentation{2, 4, 4, 1, 1, 4});
  Segmentation ok = {1, 2, 3, 4};
  CHECK(apply_long_word_policy(ok, 4) == 0);
  CHECK(ok == Segmentation{1, 2, 3, 4});
}

TEST_CASE("standard loss is zero when the augmented argmax is gold") {
  // gold = argmax achieved by making gold the only sensible path: a
  // single-character sentence
  const ModelParams m = tiny_model(2);
  const TrainSentence s = make_train_sentence({3}, {1});
  TrainConfig cfg = tiny_config();
  ParamGrads grads;
  grads.init(m);
  grads.zero();
  const SentenceLoss out = sentence_loss_standard(m, s, cfg, &grads);
  CHECK(out.loss == 0.0);
  CHECK(out.violations.empty());
  CHECK(grads.squared_norm() == 0.0);
}

TEST_CASE("standard loss cross-checks against score_sequence and margin_delta") {
  Rng rng(31);
  TrainConfig cfg = tiny_config();
  int positive = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const ModelParams m = tiny_model(900 + trial);
    const int n = 2 + static_cast<int>(rng.below(9));
    const TrainSentence s =
        make_train_sentence(oracle::random_ids(rng, n, m.vocab_size()),
                            oracle::random_segmentation(rng, n, 4));
    const SentenceLoss out = sentence_loss_standard(m, s, cfg);
    CHECK(out.loss >= 0.0);
    if (out.violations.empty()) continue;
    ++positive;
    const Segmentation& hyp = out.violations[0].path;
    const double recomputed = score_sequence(m, s.ids, hyp, s.sl) +
                              cfg.mu * margin_delta(hyp, s.gold) -
                              score_sequence(m, s.ids, s.gold, s.sl);
    CHECK(out.loss == doctest::Approx(recomputed).epsilon(1e-9));
  }
  CHECK(positive > 10);  // random gold is usually not the argmax
}

TEST_CASE("crafted early update stops at the first fall-off") {
  Crafted crafted;
  TrainConfig cfg = tiny_config();
  cfg.dims = {1, 1, 1, 4};
  cfg.beam_size = 1;
  // sentence A B C D E, gold AB | CD | E; suffix char E (id 5) appears only
  // after the stop position
  const TrainSentence s = make_train_sentence({1, 2, 3, 4, 5}, {2, 2, 1});
  ParamGrads grads;
  grads.init(crafted.m);
  grads.zero();
  const SentenceLoss out = sentence_loss_early(crafted.m, s, cfg, &grads);
  CHECK(out.stop_pos == 2);
  REQUIRE(out.violations.size() == 1);
  CHECK(out.violations[0].pos == 2);
  CHECK(out.violations[0].path == Segmentation{1, 1});
  CHECK(out.loss > 0.0);

  // gradients touch only the first two characters' embeddings
  for (const auto& [row, vec] : grads.char_rows) {
    CHECK(row != 3);
    CHECK(row != 4);
    CHECK(row != 5);
  }
  bool touched = false;
  for (const auto& [row, vec] : grads.char_rows) touched = touched || row == 1 || row == 2;
  CHECK(touched);
}

TEST_CASE("early update falls back to the standard hinge when gold survives") {
  // single character: gold trivially stays in the beam and is the argmax
  const ModelParams m = tiny_model(3);
  TrainConfig cfg = tiny_config();
  const TrainSentence s = make_train_sentence({2}, {1});
  const SentenceLoss out = sentence_loss_early(m, s, cfg);
  CHECK(out.loss == 0.0);
  CHECK(out.stop_pos == 1);
}

TEST_CASE("early update hinge is positive whenever gold fell out") {
  Rng rng(41);
  TrainConfig cfg = tiny_config();
  cfg.beam_size = 1;
  int falls = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const ModelParams m = tiny_model(1300 + trial);
    const int n = 3 + static_cast<int>(rng.below(8));
    const TrainSentence s =
        make_train_sentence(oracle::random_ids(rng, n, m.vocab_size()),
                            oracle::random_segmentation(rng, n, 4));
    const SentenceLoss out = sentence_loss_early(m, s, cfg);
    CHECK(out.loss >= 0.0);
    if (out.stop_pos < n) {
      ++falls;
      CHECK(out.loss > 0.0);
    }
  }
  CHECK(falls > 5);
}

TEST_CASE("laso resets leave exactly the gold prefix in the beam") {
  Crafted crafted;
  const TrainSentence s = make_train_sentence({1, 2, 3, 4, 5}, {2, 2, 1});
  const int n = 5;
  const GoldSpanSet gold_spans = GoldSpanSet::from_lengths(s.gold, n);
  const MarginSpec margin{0.2, &gold_spans};

  // drive the beam directly, mirroring what the LaSO strategy does
  BeamRun run(crafted.m, s.ids, s.sl, 1, &margin);
  StepState gold_state = init_decoder_state(crafted.m, nullptr);
  double gold_cum = 0.0;
  const auto gold_sp = spans_from_lengths(s.gold, n);
  std::size_t wi = 0;
  int resets = 0;
  while (!run.done()) {
    const int j = run.step();
    if (gold_spans.is_boundary(j)) {
      // roll the gold path forward to j
      while (wi < gold_sp.size() && gold_sp[wi].second <= j) {
        const auto [a, b] = gold_sp[wi];
        const Val wv =
            word_repr(crafted.m, std::span<const int>(s.ids).subspan(a, b - a), -1, nullptr);
        gold_cum += ops::scalar(nullptr, step_score(crafted.m, gold_state, wv, nullptr));
        gold_state = advance(crafted.m, gold_state, wv, nullptr);
        ++wi;
      }
      if (!run.gold_in_beam()) {
        run.reset_to_gold(gold_state, gold_cum);
        ++resets;
        // post-reset invariant: one hypothesis, on the gold path, empty
        // restarted path, floor moved here
        CHECK(run.beam().size() == 1);
        CHECK(run.hyp(run.beam().front()).on_gold);
        CHECK(run.path_from_floor(run.beam().front()).empty());
        CHECK(run.floor() == j);
        CHECK(run.best().score == doctest::Approx(gold_cum));
      }
    }
  }
  CHECK(resets >= 1);

  // and the strategy itself reports the same first violation
  TrainConfig cfg = tiny_config();
  cfg.dims = {1, 1, 1, 4};
  cfg.beam_size = 1;
  const SentenceLoss out = sentence_loss_laso(crafted.m, s, cfg);
  REQUIRE(out.violations.size() >= 1);
  CHECK(out.violations[0].pos == 2);
  CHECK(out.updates == static_cast<int>(out.violations.size()));
  CHECK(out.loss > 0.0);
}

TEST_CASE("laso violation count is bounded by gold word count plus one") {
  Rng rng(51);
  TrainConfig cfg = tiny_config();
  cfg.beam_size = 1;
  for (int trial = 0; trial < 40; ++trial) {
    const ModelParams m = tiny_model(1700 + trial);
    const int n = 3 + static_cast<int>(rng.below(8));
    const Segmentation gold = oracle::random_segmentation(rng, n, 4);
    const TrainSentence s =
        make_train_sentence(oracle::random_ids(rng, n, m.vocab_size()), gold);
    const SentenceLoss out = sentence_loss_laso(m, s, cfg);
    CHECK(out.updates <= static_cast<int>(gold.size()) + 1);
    CHECK(out.loss >= 0.0);
    for (const Violation& v : out.violations) CHECK(v.value > 0.0);
  }
}

TEST_CASE("laso without violations equals zero loss") {
  const ModelParams m = tiny_model(4);
  TrainConfig cfg = tiny_config();
  const TrainSentence s = make_train_sentence({2}, {1});
  const SentenceLoss out = sentence_loss_laso(m, s, cfg);
  CHECK(out.loss == 0.0);
  CHECK(out.updates == 0);
}

TEST_CASE("zero loss leaves parameters bit-identical under every strategy") {
  // a model that already ranks gold first: crafted with gold = the argmax
  Crafted crafted;
  TrainConfig cfg = tiny_config();
  cfg.dims = {1, 1, 1, 4};
  cfg.beam_size = 2;
  // gold A | B matches the model preference (single characters score higher)
  const TrainSentence s = make_train_sentence({1, 2}, {1, 1});
  for (auto strategy : {UpdateStrategy::standard, UpdateStrategy::early, UpdateStrategy::laso}) {
    cfg.strategy = strategy;
    ModelParams m = crafted.m;
    ParamGrads grads;
    grads.init(m);
    grads.zero();
    SentenceLoss out;
    switch (strategy) {
      case UpdateStrategy::standard: out = sentence_loss_standard(m, s, cfg, &grads); break;
      case UpdateStrategy::early: out = sentence_loss_early(m, s, cfg, &grads); break;
      case UpdateStrategy::laso: out = sentence_loss_laso(m, s, cfg, &grads); break;
    }
    CHECK(out.loss == 0.0);
    CHECK(grads.squared_norm() == 0.0);
    sgd_step(m, grads, 0.2, 5.0);
    CHECK(params_equal(m, crafted.m));
  }
}

TEST_CASE("each strategy's gradients pass the frozen-path finite-difference check") {
  Rng rng(61);
  TrainConfig cfg = tiny_config();
  cfg.beam_size = 2;
  int checked = 0;
  for (int trial = 0; trial < 12 && checked < 6; ++trial) {
    ModelParams m = tiny_model(2100 + trial, 14, 2);
    const int n = 4 + static_cast<int>(rng.below(6));
    auto ids = oracle::random_ids(rng, n, m.vocab_size());
    TrainSentence s = make_train_sentence(ids, oracle::random_segmentation(rng, n, 4));

    for (int which = 0; which < 3; ++which) {
      ParamGrads grads;
      grads.init(m);
      grads.zero();
      SentenceLoss out;
      if (which == 0) out = sentence_loss_standard(m, s, cfg, &grads);
      if (which == 1) out = sentence_loss_early(m, s, cfg, &grads);
      if (which == 2) out = sentence_loss_laso(m, s, cfg, &grads);
      if (out.violations.empty()) continue;
      ++checked;

      const auto params = oracle::all_params(m);
      const oracle::GradView view{&m, &grads};
      auto loss = [&] { return frozen_hinge_loss(m, s, cfg.mu, out.violations); };
      auto analytic = [&](const std::string& name, std::size_t i) { return view.at(name, i); };
      const auto report = grad_check(loss, analytic, params, 1e-5);
      CHECK(report.max_rel_err < 1e-4);
      // the frozen loss at the unperturbed point equals the reported loss
      CHECK(frozen_hinge_loss(m, s, cfg.mu, out.violations) ==
            doctest::Approx(out.loss).epsilon(1e-9));
    }
  }
  CHECK(checked >= 6);
}

TEST_CASE("strategies agree on loss zero when gold is the augmented argmax") {
  Rng rng(71);
  TrainConfig cfg = tiny_config();
  int agreements = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const ModelParams m = tiny_model(2600 + trial);
    const int n = 2 + static_cast<int>(rng.below(6));
    const TrainSentence s =
        make_train_sentence(oracle::random_ids(rng, n, m.vocab_size()),
                            oracle::random_segmentation(rng, n, 4));
    const SentenceLoss std_loss = sentence_loss_standard(m, s, cfg);
    if (std_loss.loss != 0.0) continue;
    ++agreements;
    CHECK(sentence_loss_early(m, s, cfg).loss == 0.0);
    CHECK(sentence_loss_laso(m, s, cfg).loss == 0.0);
  }
  CHECK(agreements > 3);
}

TEST_CASE("train runs one epoch when told to") {
  const Corpus corpus = parse_segmented_text(synth::corpus_text(synth::tiny(9)), "mem");
  const auto [train_c, dev_c] = split_dev(corpus);
  TrainConfig cfg = tiny_config();
  cfg.max_epochs = 1;
  cfg.patience = 0;
  cfg.beam_size = 1;
  cfg.seed = 3;
  const TrainedModel out = train(cfg, train_c, dev_c);
  CHECK(out.report.epochs.size() == 1);
  CHECK(out.report.best_epoch == 0);
  CHECK(out.params.all_finite());
}

TEST_CASE("training is deterministic given the seed") {
  const Corpus corpus = parse_segmented_text(synth::corpus_text(synth::tiny(10)), "mem");
  const auto [train_c, dev_c] = split_dev(corpus);
  TrainConfig cfg = tiny_config();
  cfg.max_epochs = 2;
  cfg.patience = 5;
  cfg.beam_size = 1;
  cfg.seed = 11;

  const TrainedModel a = train(cfg, train_c, dev_c);
  const TrainedModel b = train(cfg, train_c, dev_c);
  REQUIRE(a.report.epochs.size() == b.report.epochs.size());
  for (std::size_t e = 0; e < a.report.epochs.size(); ++e) {
    CHECK(a.report.epochs[e].dev_f1 == b.report.epochs[e].dev_f1);
    CHECK(a.report.epochs[e].mean_loss == b.report.epochs[e].mean_loss);
    CHECK(a.report.epochs[e].updates == b.report.epochs[e].updates);
    CHECK(a.report.epochs[e].mean_stop_fraction == b.report.epochs[e].mean_stop_fraction);
  }
  CHECK(a.report.best_epoch == b.report.best_epoch);
  CHECK(params_equal(a.params, b.params));
}
