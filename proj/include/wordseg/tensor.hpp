#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wordseg/errors.hpp"

namespace wordseg {

// Dense rank-1/rank-2 tensor of doubles. Scalars are rank-1 of size 1.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(int n) : rows_(n), cols_(1), rank_(1), d_(static_cast<std::size_t>(n), 0.0) {}
  Tensor(int rows, int cols)
      : rows_(rows), cols_(cols), rank_(2), d_(static_cast<std::size_t>(rows) * cols, 0.0) {}

  static Tensor scalar(double v) {
    Tensor t(1);
    t.d_[0] = v;
    return t;
  }
  static Tensor vec(std::initializer_list<double> xs) {
    Tensor t(static_cast<int>(xs.size()));
    std::size_t i = 0;
    for (double x : xs) t.d_[i++] = x;
    return t;
  }

  int rank() const { return rank_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int size() const { return rank_ == 1 ? rows_ : rows_ * cols_; }
  std::size_t numel() const { return d_.size(); }
  bool empty() const { return d_.empty(); }

  double* data() { return d_.data(); }
  const double* data() const { return d_.data(); }
  std::span<const double> view() const { return d_; }
  std::span<double> view() { return d_; }

  double& operator[](std::size_t i) { return d_[i]; }
  double operator[](std::size_t i) const { return d_[i]; }
  double& at(int r, int c) { return d_[static_cast<std::size_t>(r) * cols_ + c]; }
  double at(int r, int c) const { return d_[static_cast<std::size_t>(r) * cols_ + c]; }
  std::span<const double> row(int r) const { return {d_.data() + static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_)}; }

  void fill(double v) { d_.assign(d_.size(), v); }
  bool same_shape(const Tensor& o) const {
    return rank_ == o.rank_ && rows_ == o.rows_ && cols_ == o.cols_;
  }
  bool all_finite() const;

  std::string shape_str() const {
    if (rank_ == 1) return std::to_string(rows_);
    return std::to_string(rows_) + "x" + std::to_string(cols_);
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  int rank_ = 1;
  std::vector<double> d_;
};

// ----- numeric kernels (shared by traced and untraced execution) -----

// out = W*x + b. W is rows x cols, x has size cols, b has size rows.
void affine_into(const Tensor& w, const Tensor& x, const Tensor& b, Tensor& out);
// out = W*x
void matvec_into(const Tensor& w, const Tensor& x, Tensor& out);
// out += W^T * g
void matvec_transposed_add(const Tensor& w, const Tensor& g, Tensor& out);
// W_grad += g (col vec, size rows) * x^T (size cols)
void outer_add(const Tensor& g, const Tensor& x, Tensor& w_grad);

void tanh_into(const Tensor& a, Tensor& out);
void sigmoid_into(const Tensor& a, Tensor& out);
void hadamard_into(const Tensor& a, const Tensor& b, Tensor& out);
void add_into(const Tensor& a, const Tensor& b, Tensor& out);
void sub_into(const Tensor& a, const Tensor& b, Tensor& out);
void scale_into(const Tensor& a, double factor, Tensor& out);
double dot(const Tensor& a, const Tensor& b);

void require_same_shape(const Tensor& a, const Tensor& b, const char* op);

}  // namespace wordseg
