#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "wordseg/autodiff.hpp"
#include "wordseg/corpus.hpp"
#include "wordseg/tensor.hpp"

namespace wordseg {

struct ModelDims {
  int d_c = 50;          // character embedding size
  int d_w = 50;          // word embedding / composition output size
  int hidden = 50;       // LSTM hidden units
  int max_word_len = 4;  // longest composable word
};

// Every learned tensor of the segmenter.
struct ModelParams {
  ModelDims dims;

  Tensor char_emb;  // |vocab| x d_c
  Tensor word_emb;  // |shortlist| x d_w (may have 0 rows)

  // Per word length l in 1..max_word_len (index l-1):
  std::vector<Tensor> gate_w;  // (l*d_c) x (l*d_c)
  std::vector<Tensor> gate_b;  // l*d_c
  std::vector<Tensor> comp_w;  // d_w x (l*d_c)
  std::vector<Tensor> comp_b;  // d_w

  LstmParams lstm;  // input d_w, hidden H

  Tensor pred_w;    // d_w x H
  Tensor pred_b;    // d_w
  Tensor legality;  // u, d_w
  Tensor h0, c0;    // H each, learned initial recurrent state

  int vocab_size() const { return char_emb.rows(); }
  int shortlist_size() const { return word_emb.rows(); }
  std::int64_t param_count() const;

  // Canonical tensor order used for initialization draws, serialization and
  // gradient bookkeeping.
  void for_each_tensor(const std::function<void(const std::string&, Tensor&)>& fn);
  void for_each_tensor(const std::function<void(const std::string&, const Tensor&)>& fn) const;

  // All tensors except the two embedding matrices, in canonical order.
  std::vector<Tensor*> dense_tensors();
  std::vector<const Tensor*> dense_tensors() const;

  bool all_finite() const;
};

// Affine maps start uniform in +-sqrt(6/(fan_in+fan_out)), embeddings uniform
// in +-0.5/dim; biases, u and the initial state start at zero. Fully
// determined by `seed`. Pretrained rows overwrite char_emb when given.
ModelParams init_params(const ModelDims& dims, int vocab_size, int shortlist_size,
                        std::uint64_t seed, const PretrainedChars* pretrained = nullptr);

// Per-sentence gradient accumulator mirroring ModelParams. Embedding
// gradients are kept sparse by row.
struct ParamGrads {
  std::vector<Tensor> dense;  // aligned with ModelParams::dense_tensors()
  std::vector<std::pair<int, std::vector<double>>> char_rows;  // sorted by row on demand
  std::vector<std::pair<int, std::vector<double>>> word_rows;

  void init(const ModelParams& p);
  void zero();
  void add_row(std::vector<std::pair<int, std::vector<double>>>& rows, int row,
               const Tensor& g);
  double squared_norm() const;
  bool initialized() const { return !dense.empty() || dense_shapes_set_; }

  // Harvests every gradient recorded on `tape` into this accumulator.
  void accumulate(const Tape& tape, const ModelParams& params);

 private:
  std::unordered_map<const Tensor*, int> dense_slot_;
  const Tensor* char_emb_ = nullptr;
  const Tensor* word_emb_ = nullptr;
  bool dense_shapes_set_ = false;
};

// theta <- theta - lr * g, after rescaling g to `clip_norm` when its global
// L2 norm exceeds it (clip_norm <= 0 disables clipping).
void sgd_step(ModelParams& params, ParamGrads& grads, double lr, double clip_norm);

}  // namespace wordseg
