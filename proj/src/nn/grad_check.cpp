#include "seismonet/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace seismonet::nn {

std::vector<double> numeric_gradient(const std::function<double(std::span<const double>)>& loss,
                                     std::span<const double> x) {
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = 1e-5 * std::max(1.0, std::abs(x[i]));
    probe[i] = x[i] + h;
    const double up = loss(probe);
    probe[i] = x[i] - h;
    const double down = loss(probe);
    probe[i] = x[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

GradCheckResult grad_check(const std::function<double(std::span<const double>)>& loss,
                           std::span<const double> x,
                           std::span<const double> analytic) {
  if (x.size() != analytic.size()) throw std::invalid_argument("grad_check: gradient size mismatch");
  const auto numeric = numeric_gradient(loss, x);
  GradCheckResult result;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double ga = analytic[i];
    const double gn = numeric[i];
    const double err = std::abs(ga - gn) / std::max({std::abs(ga), std::abs(gn), 1e-8});
    if (i == 0 || err > result.max_rel_error) {
      result.max_rel_error = err;
      result.worst_index = i;
      result.worst_analytic = ga;
      result.worst_numeric = gn;
    }
  }
  return result;
}

}  // namespace seismonet::nn
