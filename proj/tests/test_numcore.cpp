#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "wordseg/autodiff.hpp"
#include "wordseg/rng.hpp"
#include "wordseg/tensor.hpp"

using namespace wordseg;

TEST_CASE("affine identity and hand case") {
  Tensor eye(2, 2);
  eye.at(0, 0) = 1.0;
  eye.at(1, 1) = 1.0;
  Tensor x = Tensor::vec({3.0, 4.0});
  Tensor b(2);
  Tensor out;
  affine_into(eye, x, b, out);
  CHECK(out[0] == 3.0);
  CHECK(out[1] == 4.0);

  Tensor w(2, 2);
  w.at(0, 0) = 1.0;
  w.at(0, 1) = 2.0;
  w.at(1, 0) = 0.0;
  w.at(1, 1) = 1.0;
  Tensor x2 = Tensor::vec({1.0, 1.0});
  Tensor b2 = Tensor::vec({1.0, 0.0});
  affine_into(w, x2, b2, out);
  CHECK(out[0] == 4.0);
  CHECK(out[1] == 1.0);
}

TEST_CASE("affine matches the triple-loop oracle") {
  Rng rng(11);
  Tensor w(5, 3);
  for (std::size_t i = 0; i < w.numel(); ++i) w[i] = rng.uniform(-2.0, 2.0);
  Tensor x(3);
  for (std::size_t i = 0; i < x.numel(); ++i) x[i] = rng.uniform(-2.0, 2.0);
  Tensor b(5);
  for (std::size_t i = 0; i < b.numel(); ++i) b[i] = rng.uniform(-2.0, 2.0);
  Tensor out;
  affine_into(w, x, b, out);
  const auto expect = oracle::affine(oracle::tensor_to_vec(w), 5, 3, oracle::tensor_to_vec(x),
                                     oracle::tensor_to_vec(b));
  for (int i = 0; i < 5; ++i) CHECK(out[i] == doctest::Approx(expect[i]).epsilon(1e-12));
}

TEST_CASE("affine shape mismatch names both shapes") {
  Tensor w(2, 3);
  Tensor x(2);
  Tensor b(2);
  Tensor out;
  CHECK_THROWS_WITH_AS(affine_into(w, x, b, out), doctest::Contains("2x3"), DimensionError);
}

TEST_CASE("elementwise basics") {
  Tensor zero(4);
  Tensor out;
  tanh_into(zero, out);
  for (int i = 0; i < 4; ++i) CHECK(out[i] == 0.0);
  sigmoid_into(zero, out);
  for (int i = 0; i < 4; ++i) CHECK(out[i] == 0.5);

  Tensor a = Tensor::vec({1, 2, 3});
  Tensor b = Tensor::vec({4, 5, 6});
  hadamard_into(a, b, out);
  CHECK(out[0] == 4.0);
  CHECK(out[1] == 10.0);
  CHECK(out[2] == 18.0);

  Tensor bad(2);
  CHECK_THROWS_AS(hadamard_into(a, bad, out), DimensionError);
}

TEST_CASE("elementwise ranges") {
  // strict (-1,1)/(0,1) holds until double-precision saturation near |x|=19
  Rng rng(5);
  Tensor v(64);
  for (std::size_t i = 0; i < v.numel(); ++i) v[i] = rng.uniform(-15.0, 15.0);
  Tensor t, s;
  tanh_into(v, t);
  sigmoid_into(v, s);
  for (std::size_t i = 0; i < v.numel(); ++i) {
    CHECK(t[i] > -1.0);
    CHECK(t[i] < 1.0);
    CHECK(s[i] > 0.0);
    CHECK(s[i] < 1.0);
  }
}

TEST_CASE("dot product") {
  CHECK(dot(Tensor::vec({1, 2}), Tensor::vec({3, 4})) == 11.0);
  Tensor zero(7);
  Tensor a(7);
  a.fill(3.25);
  CHECK(dot(a, zero) == 0.0);
  CHECK_THROWS_AS(dot(Tensor(3), Tensor(4)), DimensionError);

  Rng rng(99);
  Tensor u(50), v(50);
  for (int i = 0; i < 50; ++i) {
    u[i] = rng.uniform(-1.0, 1.0);
    v[i] = rng.uniform(-1.0, 1.0);
  }
  CHECK(dot(u, v) ==
        doctest::Approx(oracle::dot(oracle::tensor_to_vec(u), oracle::tensor_to_vec(v)))
            .epsilon(1e-12));
}

TEST_CASE("lstm_step zero parameters give zero state") {
  const int hidden = 4, d_in = 3;
  LstmParams p;
  p.w_x = Tensor(4 * hidden, d_in);
  p.w_h = Tensor(4 * hidden, hidden);
  p.bias = Tensor(4 * hidden);
  Val x(Tensor::vec({1.0, -2.0, 0.5}));
  LstmState s{Val(Tensor(hidden)), Val(Tensor(hidden))};
  const LstmState next = lstm_step(nullptr, p, x, s);
  for (int i = 0; i < hidden; ++i) {
    CHECK(next.h.get(nullptr)[i] == 0.0);
    CHECK(next.c.get(nullptr)[i] == 0.0);
  }
}

TEST_CASE("lstm_step cell growth bound |c'| <= |c| + 1") {
  Rng rng(17);
  const int hidden = 6, d_in = 5;
  for (int trial = 0; trial < 20; ++trial) {
    LstmParams p;
    p.w_x = Tensor(4 * hidden, d_in);
    p.w_h = Tensor(4 * hidden, hidden);
    p.bias = Tensor(4 * hidden);
    for (std::size_t i = 0; i < p.w_x.numel(); ++i) p.w_x[i] = rng.uniform(-3.0, 3.0);
    for (std::size_t i = 0; i < p.w_h.numel(); ++i) p.w_h[i] = rng.uniform(-3.0, 3.0);
    for (std::size_t i = 0; i < p.bias.numel(); ++i) p.bias[i] = rng.uniform(-3.0, 3.0);
    Tensor xv(d_in), hv(hidden), cv(hidden);
    for (int i = 0; i < d_in; ++i) xv[i] = rng.uniform(-2.0, 2.0);
    for (int i = 0; i < hidden; ++i) hv[i] = rng.uniform(-1.0, 1.0);
    for (int i = 0; i < hidden; ++i) cv[i] = rng.uniform(-4.0, 4.0);
    const LstmState next = lstm_step(nullptr, p, Val(xv), LstmState{Val(hv), Val(cv)});
    for (int i = 0; i < hidden; ++i) {
      CHECK(std::abs(next.c.get(nullptr)[i]) <= std::abs(cv[i]) + 1.0 + 1e-12);
      CHECK(std::abs(next.h.get(nullptr)[i]) < 1.0);
    }
  }
}

TEST_CASE("lstm_step matches the scalar oracle") {
  Rng rng(23);
  const int hidden = 5, d_in = 4;
  LstmParams p;
  p.w_x = Tensor(4 * hidden, d_in);
  p.w_h = Tensor(4 * hidden, hidden);
  p.bias = Tensor(4 * hidden);
  for (std::size_t i = 0; i < p.w_x.numel(); ++i) p.w_x[i] = rng.uniform(-1.0, 1.0);
  for (std::size_t i = 0; i < p.w_h.numel(); ++i) p.w_h[i] = rng.uniform(-1.0, 1.0);
  for (std::size_t i = 0; i < p.bias.numel(); ++i) p.bias[i] = rng.uniform(-1.0, 1.0);
  Tensor xv(d_in), hv(hidden), cv(hidden);
  for (int i = 0; i < d_in; ++i) xv[i] = rng.uniform(-1.0, 1.0);
  for (int i = 0; i < hidden; ++i) hv[i] = rng.uniform(-1.0, 1.0);
  for (int i = 0; i < hidden; ++i) cv[i] = rng.uniform(-1.0, 1.0);

  const LstmState next = lstm_step(nullptr, p, Val(xv), LstmState{Val(hv), Val(cv)});
  const auto expect = oracle::lstm_step(oracle::tensor_to_vec(p.w_x), oracle::tensor_to_vec(p.w_h),
                                        oracle::tensor_to_vec(p.bias), hidden, d_in,
                                        oracle::tensor_to_vec(xv), oracle::tensor_to_vec(hv),
                                        oracle::tensor_to_vec(cv));
  for (int i = 0; i < hidden; ++i) {
    CHECK(next.h.get(nullptr)[i] == doctest::Approx(expect.h[i]).epsilon(1e-12));
    CHECK(next.c.get(nullptr)[i] == doctest::Approx(expect.c[i]).epsilon(1e-12));
  }
}

TEST_CASE("backward of dot(u, u) is 2u") {
  Tape tape;
  Tensor u = Tensor::vec({1.0, -2.0, 3.0});
  const Val uv = tape.param(u);
  const Val out = tape.dot_fn(uv, uv);
  tape.backward(out);
  const Tensor& g = tape.grad(uv);
  CHECK(g[0] == 2.0);
  CHECK(g[1] == -4.0);
  CHECK(g[2] == 6.0);
}

TEST_CASE("backward leaves unused parameters at zero gradient") {
  Tape tape;
  Tensor a = Tensor::vec({1.0, 2.0});
  Tensor unused = Tensor::vec({5.0, 5.0});
  const Val av = tape.param(a);
  const Val uv = tape.param(unused);
  const Val out = tape.dot_fn(av, av);
  tape.backward(out);
  const Tensor& g = tape.grad(uv);
  CHECK(g[0] == 0.0);
  CHECK(g[1] == 0.0);
}

TEST_CASE("backward rejects non-scalar seeds") {
  Tape tape;
  const Val v = tape.leaf(Tensor::vec({1.0, 2.0}));
  CHECK_THROWS_AS(tape.backward(v), ContractError);
}

TEST_CASE("backward is deterministic") {
  auto run = [] {
    Tape tape;
    Tensor w(3, 3);
    Rng rng(31);
    for (std::size_t i = 0; i < w.numel(); ++i) w[i] = rng.uniform(-1.0, 1.0);
    Tensor x = Tensor::vec({0.3, -0.7, 0.9});
    Tensor b(3);
    const Val wv = tape.param(w);
    const Val xv = tape.leaf(x);
    const Val bv = tape.param(b);
    const Val y = tape.tanh_fn(tape.affine(wv, xv, bv));
    const Val s = tape.dot_fn(y, y);
    tape.backward(s);
    return std::pair{tape.value(s.id)[0], oracle::tensor_to_vec(tape.grad(wv))};
  };
  const auto a = run();
  const auto b = run();
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
}

TEST_CASE("grad_check on a quadratic is exact to roundoff") {
  Tensor theta = Tensor::vec({1.0, -2.0, 0.5, 3.0});
  auto loss = [&] {
    double acc = 0.0;
    for (std::size_t i = 0; i < theta.numel(); ++i) acc += theta[i] * theta[i];
    return acc;
  };
  auto analytic = [&](const std::string&, std::size_t i) { return 2.0 * theta[i]; };
  const NamedParam params[] = {{"theta", &theta}};
  const auto report = grad_check(loss, analytic, params, 1e-5);
  CHECK(report.max_rel_err < 1e-8);
}

TEST_CASE("grad_check flags a corrupted gradient") {
  Tensor theta = Tensor::vec({1.0, -2.0, 0.5, 3.0});
  auto loss = [&] {
    double acc = 0.0;
    for (std::size_t i = 0; i < theta.numel(); ++i) acc += theta[i] * theta[i];
    return acc;
  };
  auto corrupted = [&](const std::string&, std::size_t i) {
    const double g = 2.0 * theta[i];
    return i == 3 ? 2.0 * g : g;  // one entry doubled
  };
  const NamedParam params[] = {{"theta", &theta}};
  const auto report = grad_check(loss, corrupted, params, 1e-5);
  CHECK(report.max_rel_err > 0.1);
  CHECK(report.worst_index == 3);
}

TEST_CASE("tape backward of an lstm chain matches finite differences") {
  const int hidden = 4, d_in = 3;
  LstmParams p;
  p.w_x = Tensor(4 * hidden, d_in);
  p.w_h = Tensor(4 * hidden, hidden);
  p.bias = Tensor(4 * hidden);
  Rng rng(41);
  for (std::size_t i = 0; i < p.w_x.numel(); ++i) p.w_x[i] = rng.uniform(-0.5, 0.5);
  for (std::size_t i = 0; i < p.w_h.numel(); ++i) p.w_h[i] = rng.uniform(-0.5, 0.5);
  for (std::size_t i = 0; i < p.bias.numel(); ++i) p.bias[i] = rng.uniform(-0.5, 0.5);
  Tensor x1(d_in), x2(d_in), target(hidden);
  for (int i = 0; i < d_in; ++i) {
    x1[i] = rng.uniform(-1.0, 1.0);
    x2[i] = rng.uniform(-1.0, 1.0);
  }
  for (int i = 0; i < hidden; ++i) target[i] = rng.uniform(-1.0, 1.0);

  auto forward = [&](Tape* t, Val* out) {
    LstmState s{ops::leaf(t, Tensor(hidden)), ops::leaf(t, Tensor(hidden))};
    s = lstm_step(t, p, ops::leaf(t, x1), s);
    s = lstm_step(t, p, ops::leaf(t, x2), s);
    const Val diff = ops::sub(t, s.h, ops::leaf(t, target));
    const Val loss = ops::dot_fn(t, diff, diff);
    if (out) *out = loss;
    return loss.get(t)[0];
  };

  Tape tape;
  Val loss_val;
  forward(&tape, &loss_val);
  tape.backward(loss_val);

  std::vector<Tensor> grads;
  for (const Tensor* pt : {&p.w_x, &p.w_h, &p.bias}) grads.push_back(tape.grad(tape.param(*pt)));

  auto loss = [&] { return forward(nullptr, nullptr); };
  const NamedParam params[] = {{"w_x", &p.w_x}, {"w_h", &p.w_h}, {"bias", &p.bias}};
  int slot = 0;
  auto analytic = [&](const std::string& name, std::size_t i) {
    if (name == "w_x") slot = 0;
    if (name == "w_h") slot = 1;
    if (name == "bias") slot = 2;
    return grads[slot][i];
  };
  const auto report = grad_check(loss, analytic, params, 1e-5);
  CHECK(report.max_rel_err < 1e-6);
}
