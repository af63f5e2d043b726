#include "wordseg/tensor.hpp"

#include <cmath>

namespace wordseg {

bool Tensor::all_finite() const {
  for (double v : d_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                         b.shape_str());
  }
}

static void require_vector(const Tensor& v, const char* op) {
  if (v.rank() != 1) {
    throw DimensionError(std::string(op) + ": expected a vector, got " + v.shape_str());
  }
}

void matvec_into(const Tensor& w, const Tensor& x, Tensor& out) {
  if (w.rank() != 2 || x.rank() != 1 || w.cols() != x.rows()) {
    throw DimensionError(std::string("matvec: shape mismatch ") + w.shape_str() + " * " +
                         x.shape_str());
  }
  if (out.rows() != w.rows() || out.rank() != 1) out = Tensor(w.rows());
  const int m = w.rows(), n = w.cols();
  const double* wd = w.data();
  const double* xd = x.data();
  double* od = out.data();
  for (int r = 0; r < m; ++r) {
    const double* row = wd + static_cast<std::size_t>(r) * n;
    double acc = 0.0;
    for (int c = 0; c < n; ++c) acc += row[c] * xd[c];
    od[r] = acc;
  }
}

void affine_into(const Tensor& w, const Tensor& x, const Tensor& b, Tensor& out) {
  if (w.rank() != 2 || x.rank() != 1 || w.cols() != x.rows()) {
    throw DimensionError(std::string("affine: shape mismatch ") + w.shape_str() + " * " +
                         x.shape_str());
  }
  if (b.rank() != 1 || b.rows() != w.rows()) {
    throw DimensionError(std::string("affine: bias shape ") + b.shape_str() +
                         " does not match output " + std::to_string(w.rows()));
  }
  matvec_into(w, x, out);
  double* od = out.data();
  const double* bd = b.data();
  for (int r = 0; r < w.rows(); ++r) od[r] += bd[r];
}

void matvec_transposed_add(const Tensor& w, const Tensor& g, Tensor& out) {
  const int m = w.rows(), n = w.cols();
  const double* wd = w.data();
  const double* gd = g.data();
  double* od = out.data();
  for (int r = 0; r < m; ++r) {
    const double* row = wd + static_cast<std::size_t>(r) * n;
    const double gr = gd[r];
    for (int c = 0; c < n; ++c) od[c] += row[c] * gr;
  }
}

void outer_add(const Tensor& g, const Tensor& x, Tensor& w_grad) {
  const int m = g.rows(), n = x.rows();
  double* wd = w_grad.data();
  const double* gd = g.data();
  const double* xd = x.data();
  for (int r = 0; r < m; ++r) {
    double* row = wd + static_cast<std::size_t>(r) * n;
    const double gr = gd[r];
    for (int c = 0; c < n; ++c) row[c] += gr * xd[c];
  }
}

void tanh_into(const Tensor& a, Tensor& out) {
  if (!out.same_shape(a)) out = a;
  for (std::size_t i = 0; i < a.numel(); ++i) out[i] = std::tanh(a[i]);
}

void sigmoid_into(const Tensor& a, Tensor& out) {
  if (!out.same_shape(a)) out = a;
  for (std::size_t i = 0; i < a.numel(); ++i) out[i] = 1.0 / (1.0 + std::exp(-a[i]));
}

void hadamard_into(const Tensor& a, const Tensor& b, Tensor& out) {
  require_same_shape(a, b, "hadamard");
  if (!out.same_shape(a)) out = a;
  for (std::size_t i = 0; i < a.numel(); ++i) out[i] = a[i] * b[i];
}

void add_into(const Tensor& a, const Tensor& b, Tensor& out) {
  require_same_shape(a, b, "add");
  if (!out.same_shape(a)) out = a;
  for (std::size_t i = 0; i < a.numel(); ++i) out[i] = a[i] + b[i];
}

void sub_into(const Tensor& a, const Tensor& b, Tensor& out) {
  require_same_shape(a, b, "sub");
  if (!out.same_shape(a)) out = a;
  for (std::size_t i = 0; i < a.numel(); ++i) out[i] = a[i] - b[i];
}

void scale_into(const Tensor& a, double factor, Tensor& out) {
  if (!out.same_shape(a)) out = a;
  for (std::size_t i = 0; i < a.numel(); ++i) out[i] = a[i] * factor;
}

double dot(const Tensor& a, const Tensor& b) {
  require_vector(a, "dot");
  require_vector(b, "dot");
  require_same_shape(a, b, "dot");
  double acc = 0.0;
  const double* ad = a.data();
  const double* bd = b.data();
  for (std::size_t i = 0; i < a.numel(); ++i) acc += ad[i] * bd[i];
  return acc;
}

}  // namespace wordseg
