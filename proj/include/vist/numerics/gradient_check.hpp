#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "vist/errors.hpp"

namespace vist {

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
};

// Compares analytic gradients against central differences. `params` are
// pointers into the live parameter storage; each is perturbed by +-eps and
// restored. The relative error of one entry is |a-n| / max(|a|, |n|, 1e-8).
inline GradientCheckResult gradient_check_detailed(const std::function<double()>& loss,
                                                   std::span<double* const> params,
                                                   std::span<const double> analytic, double eps) {
  if (params.size() != analytic.size()) {
    throw DimensionError("gradient_check: parameter and gradient counts differ");
  }
  if (!(eps > 0.0)) throw InvalidArgument("gradient_check: eps must be positive");
  const double base = loss();
  if (loss() != base) {
    throw InvalidArgument("gradient_check: loss function is not deterministic");
  }

  GradientCheckResult result;
  for (std::size_t k = 0; k < params.size(); ++k) {
    double& w = *params[k];
    const double saved = w;
    w = saved + eps;
    const double plus = loss();
    w = saved - eps;
    const double minus = loss();
    w = saved;
    const double numeric = (plus - minus) / (2.0 * eps);
    const double a = analytic[k];
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
    const double err = std::abs(a - numeric) / denom;
    if (err > result.max_relative_error) {
      result.max_relative_error = err;
      result.worst_index = k;
    }
    ++result.checked;
  }
  return result;
}

inline double gradient_check(const std::function<double()>& loss, std::span<double* const> params,
                             std::span<const double> analytic, double eps) {
  return gradient_check_detailed(loss, params, analytic, eps).max_relative_error;
}

}  // namespace vist
