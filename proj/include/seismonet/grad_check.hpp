#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace seismonet::nn {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;

  bool passed(double tolerance) const { return max_rel_error < tolerance; }
};

/// Compares `analytic` (the gradient of `loss` at `x`) with central
/// differences, h = 1e-5 * max(1, |x_i|). Per coordinate the error is
/// |g_a - g_n| / max(|g_a|, |g_n|, 1e-8); the maximum is returned.
/// Meant to be run in 64-bit precision.
GradCheckResult grad_check(const std::function<double(std::span<const double>)>& loss,
                           std::span<const double> x,
                           std::span<const double> analytic);

/// Central-difference gradient alone.
std::vector<double> numeric_gradient(const std::function<double(std::span<const double>)>& loss,
                                     std::span<const double> x);

}  // namespace seismonet::nn
