/**
 * @file gradient_check.h
 * @brief Central finite-difference check of the hand-written backward pass.
 */

#pragma once

#include <string>
#include <vector>

#include "motifrep/model/transformer.h"

namespace motifrep {

struct TensorGradientError {
  std::string name;
  ParamGroup group;
  /// ||analytic - numeric|| / max(||analytic||, ||numeric||, norm_floor * ||full analytic gradient||).
  double relative_error = 0;
  /// Largest entry-wise |analytic - numeric| / max(|analytic|, |numeric|, floor).
  double max_entry_error = 0;
};

struct GradientCheckResult {
  std::vector<TensorGradientError> tensors;
  /// Largest tensor-level relative error within each group, indexed by ParamGroup.
  std::array<double, 4> group_error{};
  /// Relative error of the full concatenated gradient vector.
  double end_to_end = 0;
  /// Largest tensor-level relative error over all tensors.
  double max_tensor_error = 0;
};

/// Compares accumulate()'s gradients of the total loss (evaluation mode, no dropout)
/// against central differences with step `h`. Parameter values are restored afterwards.
/// Pinned pad rows are skipped. `entry_floor` bounds the entry-wise denominator; `norm_floor`
/// bounds the tensor-wise one relative to the full gradient's norm, so a tensor whose true
/// gradient is zero (key biases: softmax attention is invariant to them) is measured against
/// the scale of the whole gradient rather than its own finite-difference noise.
GradientCheckResult gradient_check(RTransformer<double>& model, const Example& ex, double lambda, double h = 1e-4,
                                   double entry_floor = 1e-6, double norm_floor = 1e-3);

}  // namespace motifrep
