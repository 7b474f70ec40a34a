/**
 * @file transformer.h
 * @brief The repetition transformer: multi-attribute embedding, post-norm Transformer
 *        encoder, classification head and label-conditioned per-attribute decoder heads,
 *        with a hand-written backward pass.
 *
 * Templated on the scalar type: float for training, double for gradient checks.
 * Only the first `rows` positions of a token matrix are processed; attention keys are
 * restricted to the input's valid rows and pad queries get an empty context, so the
 * outputs of valid rows do not depend on how many pad rows are appended.
 */

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "motifrep/core/rng.h"
#include "motifrep/model/config.h"
#include "motifrep/model/objective.h"

namespace motifrep {

enum class ParamGroup { Embedding, Encoder, Label, Decoder };

std::string_view to_string(ParamGroup g);

template <typename T>
struct Parameter {
  std::string name;
  ParamGroup group;
  Mat<T> value;
  Mat<T> grad;
  /// Row 0 is the pad embedding: held at zero, never updated.
  bool pad_row_pinned = false;
};

/// One training pair: reconstruct `target` from `input` under `label`, weighted by `weights`.
struct Example {
  const TokenMatrix* input = nullptr;
  const TokenMatrix* target = nullptr;
  int label = 0;
  const RepetitionLearningMatrix* weights = nullptr;
};

template <typename T>
struct LossValue {
  T classification = 0;
  T reconstruction = 0;
  T total = 0;
};

template <typename T>
class RTransformer {
 public:
  RTransformer(const ModelConfig& config, uint64_t seed);

  const ModelConfig& config() const { return config_; }
  std::vector<Parameter<T>>& parameters() { return params_; }
  const std::vector<Parameter<T>>& parameters() const { return params_; }
  Parameter<T>* find(std::string_view name);
  void zero_grad();

  /// Attribute lookup, concatenation and input projection (no positional term). rows x H.
  Mat<T> embed(const TokenMatrix& x, int rows) const;
  /// Encoder features in evaluation mode. rows x H.
  Mat<T> encode(const TokenMatrix& x, int rows) const;
  /// Softmax over the five classes from mean-pooled features. Throws on an all-pad input.
  RowVec<T> classify(const TokenMatrix& x) const;
  /// Decoder output for `rows` positions: real-valued token estimates (regression), or the
  /// argmax token per attribute (categorical decoder). rows x K.
  Mat<T> decode(const TokenMatrix& x, int label, int rows) const;
  /// Categorical decoder only: per-attribute logits, each rows x vocab.
  std::vector<Mat<T>> decode_logits(const TokenMatrix& x, int label, int rows) const;

  /// Loss of one example in evaluation mode.
  LossValue<T> loss(const Example& ex, double lambda) const;
  /// Forward and backward pass of one example; gradients are added to each parameter's
  /// grad. Dropout is applied when `dropout` is non-null.
  LossValue<T> accumulate(const Example& ex, double lambda, Rng* dropout);

  template <typename U>
  RTransformer<U> cast() const;

 private:
  template <typename U>
  friend class RTransformer;

  struct LayerIndex {
    int wq, bq, wk, bk, wv, bv, wo, bo, ln1_g, ln1_b, w1, b1, w2, b2, ln2_g, ln2_b;
  };
  struct LayerCache;
  struct Cache;

  RTransformer() = default;
  int add(std::string name, ParamGroup group, int rows, int cols);
  Mat<T>& value(int i) { return params_[static_cast<std::size_t>(i)].value; }
  const Mat<T>& value(int i) const { return params_[static_cast<std::size_t>(i)].value; }
  Mat<T>& grad(int i) { return params_[static_cast<std::size_t>(i)].grad; }
  void build();
  void initialize(uint64_t seed);

  Mat<T> forward(const TokenMatrix& x, int rows, Rng* dropout, Cache* cache) const;
  Mat<T> decoder_input(const Mat<T>& features, int label) const;
  LossValue<T> run(const Example& ex, double lambda, Rng* dropout, bool backward);

  ModelConfig config_;
  std::vector<Parameter<T>> params_;
  std::array<int, kNumAttributes> emb_{};
  std::array<int, kNumAttributes> emb_offset_{};
  int in_w_ = 0, in_b_ = 0, pos_ = 0;
  std::vector<LayerIndex> layers_;
  int lab_w_ = 0, lab_b_ = 0, label_emb_ = 0;
  std::array<int, kNumAttributes> head_w_{};
  std::array<int, kNumAttributes> head_b_{};
};

/// Affine map applied to each regression head: token estimate = center + half_range * output.
double head_center(int attribute);
double head_half_range(int attribute);

extern template class RTransformer<float>;
extern template class RTransformer<double>;

}  // namespace motifrep
