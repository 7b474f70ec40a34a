#include "motifrep/model/gradient_check.h"

#include <algorithm>
#include <cmath>

namespace motifrep {

GradientCheckResult gradient_check(RTransformer<double>& model, const Example& ex, double lambda, double h,
                                   double entry_floor, double norm_floor) {
  model.zero_grad();
  model.accumulate(ex, lambda, nullptr);
  double global = 0;
  for (const auto& p : model.parameters()) global += p.grad.squaredNorm();
  const double tensor_floor = norm_floor * std::sqrt(global);
  GradientCheckResult result;
  double diff_total = 0, analytic_total = 0, numeric_total = 0;
  for (auto& p : model.parameters()) {
    TensorGradientError err{p.name, p.group, 0, 0};
    double diff = 0, an = 0, nu = 0;
    const Eigen::Index first = p.pad_row_pinned ? p.value.cols() : 0;  // pad row is not a free parameter
    for (Eigen::Index i = first; i < p.value.size(); ++i) {
      double& w = p.value.data()[i];
      const double saved = w;
      w = saved + h;
      const double up = model.loss(ex, lambda).total;
      w = saved - h;
      const double down = model.loss(ex, lambda).total;
      w = saved;
      const double numeric = (up - down) / (2 * h);
      const double analytic = p.grad.data()[i];
      const double d = analytic - numeric;
      diff += d * d;
      an += analytic * analytic;
      nu += numeric * numeric;
      const double denom = std::max({std::abs(analytic), std::abs(numeric), entry_floor});
      err.max_entry_error = std::max(err.max_entry_error, std::abs(d) / denom);
    }
    const double scale = std::max(std::sqrt(std::max(an, nu)), tensor_floor);
    err.relative_error = std::sqrt(diff) / scale;
    auto& g = result.group_error[static_cast<std::size_t>(p.group)];
    g = std::max(g, err.relative_error);
    result.max_tensor_error = std::max(result.max_tensor_error, err.relative_error);
    diff_total += diff;
    analytic_total += an;
    numeric_total += nu;
    result.tensors.push_back(std::move(err));
  }
  const double scale = std::max(std::sqrt(std::max(analytic_total, numeric_total)), tensor_floor);
  result.end_to_end = std::sqrt(diff_total) / scale;
  return result;
}

}  // namespace motifrep
