/**
 * @file objective.h
 * @brief Repetition learning matrix and the classification / reconstruction losses.
 */

#pragma once

#include <array>
#include <cmath>

#include <Eigen/Dense>

#include "motifrep/core/tokenizer.h"
#include "motifrep/model/config.h"

namespace motifrep {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using RowVec = Eigen::Matrix<T, 1, Eigen::Dynamic>;

/// Per-(row, attribute) loss weights. Rows at or past valid_len are zero.
struct RepetitionLearningMatrix {
  std::array<std::array<double, kNumAttributes>, kMaxRows> weights{};
  int valid_len = 0;

  double at(int row, int attribute) const {
    return weights[static_cast<std::size_t>(row)][static_cast<std::size_t>(attribute)];
  }
};

/// a[l][k] = gamma[label][k] * (1 + count of tokens[l][k] in column k over the valid rows / valid_len).
RepetitionLearningMatrix repetition_matrix(const TokenMatrix& tokens, RepetitionType label,
                                           const GammaSchedule& gamma = default_gamma_schedule());

/// All ones on valid rows; the V variant's weighting.
RepetitionLearningMatrix uniform_matrix(const TokenMatrix& tokens);

/// -log probs[label].
template <typename T>
T loss_classification(const RowVec<T>& probs, int label) {
  return -std::log(probs(label));
}

/// sum over rows < rows(pred) and k of (a[l][k] * (target[l][k] - pred[l][k]))^2.
template <typename T>
T loss_reconstruction(const Mat<T>& pred, const TokenMatrix& target, const RepetitionLearningMatrix& a) {
  T total = 0;
  for (Eigen::Index l = 0; l < pred.rows(); ++l) {
    for (int k = 0; k < kNumAttributes; ++k) {
      const T r = static_cast<T>(a.at(static_cast<int>(l), k)) *
                  (static_cast<T>(target.rows[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)]) - pred(l, k));
      total += r * r;
    }
  }
  return total;
}

template <typename T>
T total_loss(T classification, T reconstruction, double lambda) {
  return static_cast<T>(lambda) * classification + static_cast<T>(1.0 - lambda) * reconstruction;
}

template <typename T>
RowVec<T> softmax(const RowVec<T>& logits) {
  RowVec<T> e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

}  // namespace motifrep
