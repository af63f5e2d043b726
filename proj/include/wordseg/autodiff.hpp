#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "wordseg/tensor.hpp"

namespace wordseg {

class Tape;

// A value that may live on a tape (id >= 0), reference an external tensor
// (ref), or stand alone (own). Scoring code is written once against Val and
// runs with or without differentiation depending on whether a Tape is
// supplied.
struct Val {
  Tensor own;
  const Tensor* ref = nullptr;
  std::int32_t id = -1;

  Val() = default;
  explicit Val(Tensor t) : own(std::move(t)) {}
  static Val borrowed(const Tensor& t) {
    Val v;
    v.ref = &t;
    return v;
  }
  bool traced() const { return id >= 0; }
  const Tensor& get(const Tape* t) const;
};

// Reverse-mode tape. Nodes are appended in execution order (which is a
// topological order by construction); backward walks them in exact reverse.
class Tape {
 public:
  enum class Op : std::uint8_t {
    leaf,       // constant or input
    param,      // leaf tied to an external parameter tensor
    lookup,     // row of an external parameter matrix
    affine,     // W*x + b
    matvec,     // W*x
    add,
    sub,
    scale,      // constant factor
    hadamard,
    tanh_fn,
    sigmoid_fn,
    dot,
    concat,
    slice,
  };

  Val leaf(Tensor v);
  Val constant(double v) { return leaf(Tensor::scalar(v)); }
  // Dense parameter leaf; one node per distinct tensor address per tape.
  Val param(const Tensor& p);
  // Row `row` of parameter matrix `m` (embedding lookup). Gradients are kept
  // per looked-up row, never densified to the full matrix.
  Val lookup_row(const Tensor& m, int row);

  Val affine(const Val& w, const Val& x, const Val& b);
  Val matvec(const Val& w, const Val& x);
  Val add(const Val& a, const Val& b);
  Val sub(const Val& a, const Val& b);
  Val scale(const Val& a, double factor);
  Val hadamard(const Val& a, const Val& b);
  Val tanh_fn(const Val& a);
  Val sigmoid_fn(const Val& a);
  Val dot_fn(const Val& a, const Val& b);
  Val concat(std::span<const Val> parts);
  Val slice(const Val& a, int offset, int len);

  // Seeds d(out)/d(out) = 1 and accumulates gradients in reverse node order.
  // `out` must be a scalar (numel == 1) recorded on this tape.
  void backward(const Val& out);

  const Tensor& value(std::int32_t id) const {
    const Node& n = nodes_[id];
    return n.op == Op::param ? *n.bound : n.value;
  }
  const Tensor& value(const Val& v) const { return v.get(this); }
  // Gradient of the last backward() w.r.t. a recorded value.
  const Tensor& grad(const Val& v) const;

  // Dense parameter gradient harvest: fn(const Tensor* param, const Tensor& grad).
  void for_each_param_grad(const std::function<void(const Tensor*, const Tensor&)>& fn) const;
  // Embedding row gradient harvest: fn(const Tensor* matrix, int row, const Tensor& grad).
  void for_each_row_grad(const std::function<void(const Tensor*, int, const Tensor&)>& fn) const;

  std::size_t node_count() const { return nodes_.size(); }
  // Drop all nodes but keep allocation for reuse.
  void clear();

 private:
  friend struct Val;
  struct Node {
    Op op;
    std::array<std::int32_t, 4> in{-1, -1, -1, -1};
    std::int32_t aux0 = 0;  // slice offset / lookup row
    std::int32_t aux1 = 0;  // slice length
    double factor = 1.0;
    const Tensor* bound = nullptr;  // param / lookup source
    Tensor value;
    Tensor grad;
    bool dirty = false;  // grad has been touched since last backward reset
  };

  std::int32_t push(Node&& n);
  Tensor& grad_buf(std::int32_t id);
  const Tensor& in_val(const Node& n, int k) const { return value(n.in[k]); }

  std::vector<Node> nodes_;
  std::unordered_map<const Tensor*, std::int32_t> param_ids_;
  bool ran_backward_ = false;
};

inline const Tensor& Val::get(const Tape* t) const {
  if (id >= 0) return t->value(id);
  return ref ? *ref : own;
}

// ----- LSTM cell -----

// Gate blocks are stacked in the fixed order: input, forget, cell, output.
// No peepholes. h' = o .* tanh(c'), c' = f .* c + i .* g.
struct LstmParams {
  Tensor w_x;   // 4H x d_in
  Tensor w_h;   // 4H x H
  Tensor bias;  // 4H
  int hidden() const { return bias.size() / 4; }
};

struct LstmState {
  Val h;
  Val c;
};

LstmState lstm_step(Tape* t, const LstmParams& p, const Val& x, const LstmState& s);

// ----- helper ops usable with or without a tape -----

namespace ops {
Val leaf(Tape* t, Tensor v);
Val param(Tape* t, const Tensor& p);
Val lookup_row(Tape* t, const Tensor& m, int row);
Val affine(Tape* t, const Val& w, const Val& x, const Val& b);
Val matvec(Tape* t, const Val& w, const Val& x);
Val add(Tape* t, const Val& a, const Val& b);
Val sub(Tape* t, const Val& a, const Val& b);
Val scale(Tape* t, const Val& a, double factor);
Val hadamard(Tape* t, const Val& a, const Val& b);
Val tanh_fn(Tape* t, const Val& a);
Val sigmoid_fn(Tape* t, const Val& a);
Val dot_fn(Tape* t, const Val& a, const Val& b);
Val concat(Tape* t, std::span<const Val> parts);
Val slice(Tape* t, const Val& a, int offset, int len);
inline double scalar(const Tape* t, const Val& v) { return v.get(t)[0]; }
}  // namespace ops

// ----- gradient checking -----

struct NamedParam {
  std::string name;
  Tensor* tensor;
};

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::string worst_param;
  int worst_index = -1;
  double analytic = 0.0;
  double numeric = 0.0;
};

// Compares `analytic(name, flat_index)` against central differences
// (f(t+eps) - f(t-eps)) / (2 eps) of `loss` for every parameter coordinate.
// Tensors larger than max_coords_per_tensor are subsampled with `seed`
// (max_coords_per_tensor <= 0 sweeps everything). Relative error per
// coordinate is |a - n| / max(|a|, |n|, 1e-6).
GradCheckReport grad_check(const std::function<double()>& loss,
                           const std::function<double(const std::string&, std::size_t)>& analytic,
                           std::span<const NamedParam> params, double eps,
                           int max_coords_per_tensor = 0, std::uint64_t seed = 0);

}  // namespace wordseg
