#include "wordseg/model.hpp"

#include <algorithm>
#include <cmath>

#include "wordseg/rng.hpp"

namespace wordseg {

std::int64_t ModelParams::param_count() const {
  std::int64_t total = 0;
  const_cast<ModelParams*>(this)->for_each_tensor(
      [&](const std::string&, Tensor& t) { total += static_cast<std::int64_t>(t.numel()); });
  return total;
}

void ModelParams::for_each_tensor(const std::function<void(const std::string&, Tensor&)>& fn) {
  fn("char_emb", char_emb);
  fn("word_emb", word_emb);
  for (int l = 1; l <= dims.max_word_len; ++l) {
    fn("gate_w_" + std::to_string(l), gate_w[l - 1]);
    fn("gate_b_" + std::to_string(l), gate_b[l - 1]);
  }
  for (int l = 1; l <= dims.max_word_len; ++l) {
    fn("comp_w_" + std::to_string(l), comp_w[l - 1]);
    fn("comp_b_" + std::to_string(l), comp_b[l - 1]);
  }
  fn("lstm_w_x", lstm.w_x);
  fn("lstm_w_h", lstm.w_h);
  fn("lstm_bias", lstm.bias);
  fn("pred_w", pred_w);
  fn("pred_b", pred_b);
  fn("legality", legality);
  fn("h0", h0);
  fn("c0", c0);
}

void ModelParams::for_each_tensor(
    const std::function<void(const std::string&, const Tensor&)>& fn) const {
  const_cast<ModelParams*>(this)->for_each_tensor(
      [&](const std::string& name, Tensor& t) { fn(name, t); });
}

std::vector<Tensor*> ModelParams::dense_tensors() {
  std::vector<Tensor*> out;
  for_each_tensor([&](const std::string& name, Tensor& t) {
    if (name != "char_emb" && name != "word_emb") out.push_back(&t);
  });
  return out;
}

std::vector<const Tensor*> ModelParams::dense_tensors() const {
  auto mutable_list = const_cast<ModelParams*>(this)->dense_tensors();
  return {mutable_list.begin(), mutable_list.end()};
}

bool ModelParams::all_finite() const {
  bool ok = true;
  for_each_tensor([&](const std::string&, const Tensor& t) { ok = ok && t.all_finite(); });
  return ok;
}

namespace {

void glorot_fill(Tensor& w, Rng& rng) {
  const double bound = std::sqrt(6.0 / (w.rows() + w.cols()));
  for (std::size_t i = 0; i < w.numel(); ++i) w[i] = rng.uniform(-bound, bound);
}

void embedding_fill(Tensor& e, Rng& rng) {
  if (e.numel() == 0) return;
  const double bound = 0.5 / e.cols();
  for (std::size_t i = 0; i < e.numel(); ++i) e[i] = rng.uniform(-bound, bound);
}

}  // namespace

ModelParams init_params(const ModelDims& dims, int vocab_size, int shortlist_size,
                        std::uint64_t seed, const PretrainedChars* pretrained) {
  if (dims.d_c < 1 || dims.d_w < 1 || dims.hidden < 1 || dims.max_word_len < 1) {
    throw ContractError("init_params: dimensions must be positive");
  }
  if (vocab_size < 1) throw ContractError("init_params: vocab_size must be >= 1");

  ModelParams p;
  p.dims = dims;
  p.char_emb = Tensor(vocab_size, dims.d_c);
  p.word_emb = Tensor(shortlist_size, dims.d_w);
  p.gate_w.resize(dims.max_word_len);
  p.gate_b.resize(dims.max_word_len);
  p.comp_w.resize(dims.max_word_len);
  p.comp_b.resize(dims.max_word_len);
  for (int l = 1; l <= dims.max_word_len; ++l) {
    p.gate_w[l - 1] = Tensor(l * dims.d_c, l * dims.d_c);
    p.gate_b[l - 1] = Tensor(l * dims.d_c);
    p.comp_w[l - 1] = Tensor(dims.d_w, l * dims.d_c);
    p.comp_b[l - 1] = Tensor(dims.d_w);
  }
  p.lstm.w_x = Tensor(4 * dims.hidden, dims.d_w);
  p.lstm.w_h = Tensor(4 * dims.hidden, dims.hidden);
  p.lstm.bias = Tensor(4 * dims.hidden);
  p.pred_w = Tensor(dims.d_w, dims.hidden);
  p.pred_b = Tensor(dims.d_w);
  p.legality = Tensor(dims.d_w);
  p.h0 = Tensor(dims.hidden);
  p.c0 = Tensor(dims.hidden);

  // Draws happen in canonical tensor order; biases, u and the initial state
  // stay zero.
  Rng rng(seed);
  p.for_each_tensor([&](const std::string& name, Tensor& t) {
    if (name == "char_emb" || name == "word_emb") {
      embedding_fill(t, rng);
    } else if (t.rank() == 2) {
      glorot_fill(t, rng);
    }
  });

  if (pretrained) {
    if (pretrained->rows.rows() != vocab_size || pretrained->rows.cols() != dims.d_c) {
      throw DimensionError("pretrained matrix " + pretrained->rows.shape_str() +
                           " does not match char embeddings " + p.char_emb.shape_str());
    }
    for (int r = 0; r < vocab_size; ++r) {
      if (!pretrained->present[r]) continue;
      for (int c = 0; c < dims.d_c; ++c) p.char_emb.at(r, c) = pretrained->rows.at(r, c);
    }
  }
  return p;
}

// ----- ParamGrads -----

void ParamGrads::init(const ModelParams& p) {
  dense.clear();
  dense_slot_.clear();
  auto tensors = p.dense_tensors();
  dense.reserve(tensors.size());
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const Tensor& t = *tensors[i];
    dense.push_back(t.rank() == 1 ? Tensor(t.rows()) : Tensor(t.rows(), t.cols()));
    dense_slot_.emplace(tensors[i], static_cast<int>(i));
  }
  char_emb_ = &p.char_emb;
  word_emb_ = &p.word_emb;
  char_rows.clear();
  word_rows.clear();
  dense_shapes_set_ = true;
}

void ParamGrads::zero() {
  for (Tensor& t : dense) t.fill(0.0);
  char_rows.clear();
  word_rows.clear();
}

void ParamGrads::add_row(std::vector<std::pair<int, std::vector<double>>>& rows, int row,
                         const Tensor& g) {
  for (auto& [r, vec] : rows) {
    if (r == row) {
      for (std::size_t i = 0; i < vec.size(); ++i) vec[i] += g[i];
      return;
    }
  }
  rows.emplace_back(row, std::vector<double>(g.data(), g.data() + g.numel()));
}

void ParamGrads::accumulate(const Tape& tape, const ModelParams& params) {
  if (!dense_shapes_set_) init(params);
  tape.for_each_param_grad([&](const Tensor* p, const Tensor& g) {
    auto it = dense_slot_.find(p);
    if (it == dense_slot_.end()) {
      throw ContractError("gradient recorded for a tensor outside the model");
    }
    Tensor& acc = dense[it->second];
    for (std::size_t i = 0; i < g.numel(); ++i) acc[i] += g[i];
  });
  tape.for_each_row_grad([&](const Tensor* m, int row, const Tensor& g) {
    if (m == char_emb_) {
      add_row(char_rows, row, g);
    } else if (m == word_emb_) {
      add_row(word_rows, row, g);
    } else {
      throw ContractError("row gradient recorded for a matrix outside the model");
    }
  });
}

double ParamGrads::squared_norm() const {
  double acc = 0.0;
  for (const Tensor& t : dense) {
    for (std::size_t i = 0; i < t.numel(); ++i) acc += t[i] * t[i];
  }
  for (const auto* rows : {&char_rows, &word_rows}) {
    for (const auto& [row, vec] : *rows) {
      for (double v : vec) acc += v * v;
    }
  }
  return acc;
}

void sgd_step(ModelParams& params, ParamGrads& grads, double lr, double clip_norm) {
  double scale = 1.0;
  if (clip_norm > 0.0) {
    const double norm = std::sqrt(grads.squared_norm());
    if (norm > clip_norm) scale = clip_norm / norm;
  }
  const double step = lr * scale;

  auto tensors = params.dense_tensors();
  if (tensors.size() != grads.dense.size()) {
    throw DimensionError("sgd_step: gradient slots " + std::to_string(grads.dense.size()) +
                         " do not match parameter tensors " + std::to_string(tensors.size()));
  }
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    Tensor& t = *tensors[i];
    const Tensor& g = grads.dense[i];
    if (!t.same_shape(g)) {
      throw DimensionError("sgd_step: gradient shape " + g.shape_str() +
                           " does not match parameter " + t.shape_str());
    }
    for (std::size_t j = 0; j < t.numel(); ++j) t[j] -= step * g[j];
  }

  auto apply_rows = [&](Tensor& emb, std::vector<std::pair<int, std::vector<double>>>& rows) {
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [row, vec] : rows) {
      if (row < 0 || row >= emb.rows() || static_cast<int>(vec.size()) != emb.cols()) {
        throw DimensionError("sgd_step: row gradient " + std::to_string(row) + "/" +
                             std::to_string(vec.size()) + " does not fit " + emb.shape_str());
      }
      double* dst = emb.data() + static_cast<std::size_t>(row) * emb.cols();
      for (std::size_t j = 0; j < vec.size(); ++j) dst[j] -= step * vec[j];
    }
  };
  apply_rows(params.char_emb, grads.char_rows);
  apply_rows(params.word_emb, grads.word_rows);
}

}  // namespace wordseg
