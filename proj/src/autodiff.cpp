#include "wordseg/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "wordseg/rng.hpp"

namespace wordseg {

std::int32_t Tape::push(Node&& n) {
  nodes_.push_back(std::move(n));
  return static_cast<std::int32_t>(nodes_.size()) - 1;
}

Tensor& Tape::grad_buf(std::int32_t id) {
  Node& n = nodes_[id];
  if (!n.dirty) {
    const Tensor& v = value(id);
    if (!n.grad.same_shape(v)) {
      n.grad = v.rank() == 1 ? Tensor(v.rows()) : Tensor(v.rows(), v.cols());
    } else {
      n.grad.fill(0.0);
    }
    n.dirty = true;
  }
  return n.grad;
}

Val Tape::leaf(Tensor v) {
  Node n;
  n.op = Op::leaf;
  n.value = std::move(v);
  Val out;
  out.id = push(std::move(n));
  return out;
}

Val Tape::param(const Tensor& p) {
  auto it = param_ids_.find(&p);
  if (it != param_ids_.end()) {
    Val out;
    out.id = it->second;
    return out;
  }
  Node n;
  n.op = Op::param;
  n.bound = &p;
  Val out;
  out.id = push(std::move(n));
  param_ids_.emplace(&p, out.id);
  return out;
}

Val Tape::lookup_row(const Tensor& m, int row) {
  if (m.rank() != 2 || row < 0 || row >= m.rows()) {
    throw ContractError("lookup_row: row " + std::to_string(row) + " outside matrix " +
                        m.shape_str());
  }
  Node n;
  n.op = Op::lookup;
  n.bound = &m;
  n.aux0 = row;
  Tensor v(m.cols());
  auto src = m.row(row);
  std::copy(src.begin(), src.end(), v.data());
  n.value = std::move(v);
  Val out;
  out.id = push(std::move(n));
  return out;
}

Val Tape::affine(const Val& w, const Val& x, const Val& b) {
  Node n;
  n.op = Op::affine;
  n.in = {w.id, x.id, b.id, -1};
  affine_into(value(w.id), value(x.id), value(b.id), n.value);
  Val out;
  out.id = push(std::move(n));
  return out;
}

Val Tape::matvec(const Val& w, const Val& x) {
  Node n;
  n.op = Op::matvec;
  n.in = {w.id, x.id, -1, -1};
  matvec_into(value(w.id), value(x.id), n.value);
  Val out;
  out.id = push(std::move(n));
  return out;
}

#define WORDSEG_BINOP(method, opkind, kernel)              \
  Val Tape::method(const Val& a, const Val& b) {           \
    Node n;                                                \
    n.op = Op::opkind;                                     \
    n.in = {a.id, b.id, -1, -1};                           \
    kernel(value(a.id), value(b.id), n.value);             \
    Val out;                                               \
    out.id = push(std::move(n));                           \
    return out;                                            \
  }

WORDSEG_BINOP(add, add, add_into)
WORDSEG_BINOP(sub, sub, sub_into)
WORDSEG_BINOP(hadamard, hadamard, hadamard_into)
#undef WORDSEG_BINOP

Val Tape::scale(const Val& a, double factor) {
  Node n;
  n.op = Op::scale;
  n.in = {a.id, -1, -1, -1};
  n.factor = factor;
  scale_into(value(a.id), factor, n.value);
  Val out;
  out.id = push(std::move(n));
  return out;
}

Val Tape::tanh_fn(const Val& a) {
  Node n;
  n.op = Op::tanh_fn;
  n.in = {a.id, -1, -1, -1};
  tanh_into(value(a.id), n.value);
  Val out;
  out.id = push(std::move(n));
  return out;
}

Val Tape::sigmoid_fn(const Val& a) {
  Node n;
  n.op = Op::sigmoid_fn;
  n.in = {a.id, -1, -1, -1};
  sigmoid_into(value(a.id), n.value);
  Val out;
  out.id = push(std::move(n));
  return out;
}

Val Tape::dot_fn(const Val& a, const Val& b) {
  Node n;
  n.op = Op::dot;
  n.in = {a.id, b.id, -1, -1};
  n.value = Tensor::scalar(dot(value(a.id), value(b.id)));
  Val out;
  out.id = push(std::move(n));
  return out;
}

Val Tape::concat(std::span<const Val> parts) {
  if (parts.empty() || parts.size() > 4) {
    throw ContractError("concat: expected 1..4 parts, got " + std::to_string(parts.size()));
  }
  Node n;
  n.op = Op::concat;
  int total = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    n.in[i] = parts[i].id;
    total += value(parts[i].id).size();
  }
  Tensor v(total);
  int off = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const Tensor& p = value(parts[i].id);
    std::copy(p.data(), p.data() + p.size(), v.data() + off);
    off += p.size();
  }
  n.value = std::move(v);
  Val out;
  out.id = push(std::move(n));
  return out;
}

Val Tape::slice(const Val& a, int offset, int len) {
  const Tensor& src = value(a.id);
  if (offset < 0 || len < 1 || offset + len > src.size()) {
    throw ContractError("slice: [" + std::to_string(offset) + ", " + std::to_string(offset + len) +
                        ") outside vector of size " + std::to_string(src.size()));
  }
  Node n;
  n.op = Op::slice;
  n.in = {a.id, -1, -1, -1};
  n.aux0 = offset;
  n.aux1 = len;
  Tensor v(len);
  std::copy(src.data() + offset, src.data() + offset + len, v.data());
  n.value = std::move(v);
  Val out;
  out.id = push(std::move(n));
  return out;
}

const Tensor& Tape::grad(const Val& v) const {
  static const Tensor kEmpty;
  if (!v.traced()) throw ContractError("grad: value is not on this tape");
  const Node& n = nodes_[v.id];
  if (!n.dirty) {
    // untouched by backward: gradient is identically zero
    const_cast<Tape*>(this)->grad_buf(v.id);
  }
  return nodes_[v.id].grad;
}

void Tape::backward(const Val& out) {
  if (!out.traced() || out.id >= static_cast<std::int32_t>(nodes_.size())) {
    throw ContractError("backward: output is not recorded on this tape");
  }
  if (value(out.id).numel() != 1) {
    throw ContractError("backward: output must be a scalar, got shape " +
                        value(out.id).shape_str());
  }
  if (ran_backward_) {
    for (Node& n : nodes_) n.dirty = false;
  }
  ran_backward_ = true;
  grad_buf(out.id)[0] = 1.0;

  for (std::int32_t id = out.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.dirty) continue;
    const Tensor& g = n.grad;
    switch (n.op) {
      case Op::leaf:
      case Op::param:
      case Op::lookup:
        break;
      case Op::affine:
      case Op::matvec: {
        const Tensor& w = in_val(n, 0);
        const Tensor& x = in_val(n, 1);
        outer_add(g, x, grad_buf(n.in[0]));
        matvec_transposed_add(w, g, grad_buf(n.in[1]));
        if (n.op == Op::affine) {
          Tensor& gb = grad_buf(n.in[2]);
          for (std::size_t i = 0; i < g.numel(); ++i) gb[i] += g[i];
        }
        break;
      }
      case Op::add: {
        Tensor& ga = grad_buf(n.in[0]);
        Tensor& gb = grad_buf(n.in[1]);
        for (std::size_t i = 0; i < g.numel(); ++i) {
          ga[i] += g[i];
          gb[i] += g[i];
        }
        break;
      }
      case Op::sub: {
        Tensor& ga = grad_buf(n.in[0]);
        Tensor& gb = grad_buf(n.in[1]);
        for (std::size_t i = 0; i < g.numel(); ++i) {
          ga[i] += g[i];
          gb[i] -= g[i];
        }
        break;
      }
      case Op::scale: {
        Tensor& ga = grad_buf(n.in[0]);
        for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += n.factor * g[i];
        break;
      }
      case Op::hadamard: {
        const Tensor& a = in_val(n, 0);
        const Tensor& b = in_val(n, 1);
        Tensor& ga = grad_buf(n.in[0]);
        Tensor& gb = grad_buf(n.in[1]);
        for (std::size_t i = 0; i < g.numel(); ++i) {
          ga[i] += g[i] * b[i];
          gb[i] += g[i] * a[i];
        }
        break;
      }
      case Op::tanh_fn: {
        Tensor& ga = grad_buf(n.in[0]);
        for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * (1.0 - n.value[i] * n.value[i]);
        break;
      }
      case Op::sigmoid_fn: {
        Tensor& ga = grad_buf(n.in[0]);
        for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * n.value[i] * (1.0 - n.value[i]);
        break;
      }
      case Op::dot: {
        const Tensor& a = in_val(n, 0);
        const Tensor& b = in_val(n, 1);
        Tensor& ga = grad_buf(n.in[0]);
        Tensor& gb = grad_buf(n.in[1]);
        const double g0 = g[0];
        for (std::size_t i = 0; i < a.numel(); ++i) {
          ga[i] += g0 * b[i];
          gb[i] += g0 * a[i];
        }
        break;
      }
      case Op::concat: {
        int off = 0;
        for (int k = 0; k < 4 && n.in[k] >= 0; ++k) {
          Tensor& gk = grad_buf(n.in[k]);
          for (int i = 0; i < gk.size(); ++i) gk[i] += g[off + i];
          off += gk.size();
        }
        break;
      }
      case Op::slice: {
        Tensor& ga = grad_buf(n.in[0]);
        for (int i = 0; i < n.aux1; ++i) ga[n.aux0 + i] += g[i];
        break;
      }
    }
  }
}

void Tape::for_each_param_grad(const std::function<void(const Tensor*, const Tensor&)>& fn) const {
  for (const Node& n : nodes_) {
    if (n.op == Op::param && n.dirty) fn(n.bound, n.grad);
  }
}

void Tape::for_each_row_grad(const std::function<void(const Tensor*, int, const Tensor&)>& fn) const {
  for (const Node& n : nodes_) {
    if (n.op == Op::lookup && n.dirty) fn(n.bound, n.aux0, n.grad);
  }
}

void Tape::clear() {
  nodes_.clear();
  param_ids_.clear();
  ran_backward_ = false;
}

// ----- LSTM -----

LstmState lstm_step(Tape* t, const LstmParams& p, const Val& x, const LstmState& s) {
  const int h = p.hidden();
  if (p.w_x.rows() != 4 * h || p.w_h.rows() != 4 * h || p.w_h.cols() != h) {
    throw DimensionError("lstm_step: parameter shapes " + p.w_x.shape_str() + ", " +
                         p.w_h.shape_str() + ", " + p.bias.shape_str() + " are inconsistent");
  }
  if (x.get(t).size() != p.w_x.cols()) {
    throw DimensionError("lstm_step: input size " + x.get(t).shape_str() +
                         " does not match " + p.w_x.shape_str());
  }
  if (s.h.get(t).size() != h || s.c.get(t).size() != h) {
    throw DimensionError("lstm_step: state sizes " + s.h.get(t).shape_str() + ", " +
                         s.c.get(t).shape_str() + " do not match hidden " + std::to_string(h));
  }
  const Val wx = ops::param(t, p.w_x);
  const Val wh = ops::param(t, p.w_h);
  const Val bias = ops::param(t, p.bias);

  const Val z = ops::add(t, ops::affine(t, wx, x, bias), ops::matvec(t, wh, s.h));
  const Val gate_in = ops::sigmoid_fn(t, ops::slice(t, z, 0, h));
  const Val gate_forget = ops::sigmoid_fn(t, ops::slice(t, z, h, h));
  const Val cell_cand = ops::tanh_fn(t, ops::slice(t, z, 2 * h, h));
  const Val gate_out = ops::sigmoid_fn(t, ops::slice(t, z, 3 * h, h));

  LstmState next;
  next.c = ops::add(t, ops::hadamard(t, gate_forget, s.c), ops::hadamard(t, gate_in, cell_cand));
  next.h = ops::hadamard(t, gate_out, ops::tanh_fn(t, next.c));
  return next;
}

namespace ops {

Val leaf(Tape* t, Tensor v) {
  if (t) return t->leaf(std::move(v));
  return Val(std::move(v));
}

Val param(Tape* t, const Tensor& p) {
  if (t) return t->param(p);
  return Val::borrowed(p);
}

Val lookup_row(Tape* t, const Tensor& m, int row) {
  if (t) return t->lookup_row(m, row);
  if (m.rank() != 2 || row < 0 || row >= m.rows()) {
    throw ContractError("lookup_row: row " + std::to_string(row) + " outside matrix " +
                        m.shape_str());
  }
  Tensor v(m.cols());
  auto src = m.row(row);
  std::copy(src.begin(), src.end(), v.data());
  return Val(std::move(v));
}

Val affine(Tape* t, const Val& w, const Val& x, const Val& b) {
  if (t) return t->affine(w, x, b);
  Val out;
  affine_into(w.get(t), x.get(t), b.get(t), out.own);
  return out;
}

Val matvec(Tape* t, const Val& w, const Val& x) {
  if (t) return t->matvec(w, x);
  Val out;
  matvec_into(w.get(t), x.get(t), out.own);
  return out;
}

Val add(Tape* t, const Val& a, const Val& b) {
  if (t) return t->add(a, b);
  Val out;
  add_into(a.get(t), b.get(t), out.own);
  return out;
}

Val sub(Tape* t, const Val& a, const Val& b) {
  if (t) return t->sub(a, b);
  Val out;
  sub_into(a.get(t), b.get(t), out.own);
  return out;
}

Val scale(Tape* t, const Val& a, double factor) {
  if (t) return t->scale(a, factor);
  Val out;
  scale_into(a.get(t), factor, out.own);
  return out;
}

Val hadamard(Tape* t, const Val& a, const Val& b) {
  if (t) return t->hadamard(a, b);
  Val out;
  hadamard_into(a.get(t), b.get(t), out.own);
  return out;
}

Val tanh_fn(Tape* t, const Val& a) {
  if (t) return t->tanh_fn(a);
  Val out;
  tanh_into(a.get(t), out.own);
  return out;
}

Val sigmoid_fn(Tape* t, const Val& a) {
  if (t) return t->sigmoid_fn(a);
  Val out;
  sigmoid_into(a.get(t), out.own);
  return out;
}

Val dot_fn(Tape* t, const Val& a, const Val& b) {
  if (t) return t->dot_fn(a, b);
  return Val(Tensor::scalar(dot(a.get(t), b.get(t))));
}

Val concat(Tape* t, std::span<const Val> parts) {
  if (t) return t->concat(parts);
  if (parts.empty() || parts.size() > 4) {
    throw ContractError("concat: expected 1..4 parts, got " + std::to_string(parts.size()));
  }
  int total = 0;
  for (const Val& p : parts) total += p.get(t).size();
  Tensor v(total);
  int off = 0;
  for (const Val& p : parts) {
    const Tensor& pv = p.get(t);
    std::copy(pv.data(), pv.data() + pv.size(), v.data() + off);
    off += pv.size();
  }
  return Val(std::move(v));
}

Val slice(Tape* t, const Val& a, int offset, int len) {
  if (t) return t->slice(a, offset, len);
  const Tensor& src = a.get(t);
  if (offset < 0 || len < 1 || offset + len > src.size()) {
    throw ContractError("slice: [" + std::to_string(offset) + ", " + std::to_string(offset + len) +
                        ") outside vector of size " + std::to_string(src.size()));
  }
  Tensor v(len);
  std::copy(src.data() + offset, src.data() + offset + len, v.data());
  return Val(std::move(v));
}

}  // namespace ops

// ----- gradient check -----

GradCheckReport grad_check(const std::function<double()>& loss,
                           const std::function<double(const std::string&, std::size_t)>& analytic,
                           std::span<const NamedParam> params, double eps,
                           int max_coords_per_tensor, std::uint64_t seed) {
  GradCheckReport report;
  Rng rng(seed);
  for (const NamedParam& p : params) {
    Tensor& tensor = *p.tensor;
    const std::size_t count = tensor.numel();
    std::vector<std::size_t> coords;
    if (max_coords_per_tensor > 0 && count > static_cast<std::size_t>(max_coords_per_tensor)) {
      coords.reserve(max_coords_per_tensor);
      for (int i = 0; i < max_coords_per_tensor; ++i) coords.push_back(rng.below(count));
      std::sort(coords.begin(), coords.end());
      coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
    } else {
      coords.resize(count);
      for (std::size_t i = 0; i < count; ++i) coords[i] = i;
    }
    for (std::size_t i : coords) {
      const double saved = tensor[i];
      tensor[i] = saved + eps;
      const double up = loss();
      tensor[i] = saved - eps;
      const double down = loss();
      tensor[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic(p.name, i);
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
      const double rel = std::abs(a - numeric) / denom;
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst_param = p.name;
        report.worst_index = static_cast<int>(i);
        report.analytic = a;
        report.numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace wordseg
