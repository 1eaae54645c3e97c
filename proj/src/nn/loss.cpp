#include <cmath>

#include "seismonet/error.hpp"
#include "seismonet/layers.hpp"

namespace seismonet::nn {

double smooth_l1(double x) {
  const double a = std::abs(x);
  return a < 1.0 ? 0.5 * x * x : a - 0.5;
}

template <typename T>
LossResult<T> smooth_l1_loss(const Tensor<T>& pred, const Tensor<T>& target, Reduction reduction) {
  if (pred.shape() != target.shape()) {
    throw ValidationError("smooth_l1_loss: shapes " + to_string(pred.shape()) + " and " +
                          to_string(target.shape()) + " differ");
  }
  LossResult<T> out{0.0, Tensor<T>(pred.shape())};
  const auto p = pred.data();
  const auto t = target.data();
  auto g = out.grad.data();
  double scale = 1.0;
  if (reduction == Reduction::Mean) scale = 1.0 / static_cast<double>(p.size());
  if (reduction == Reduction::WindowSum) scale = 1.0 / static_cast<double>(pred.batch());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double x = static_cast<double>(p[i]) - static_cast<double>(t[i]);
    total += smooth_l1(x);
    const double d = std::abs(x) < 1.0 ? x : (x > 0.0 ? 1.0 : -1.0);
    g[i] = static_cast<T>(d * scale);
  }
  out.value = total * scale;
  return out;
}

template LossResult<float> smooth_l1_loss<float>(const Tensor<float>&, const Tensor<float>&, Reduction);
template LossResult<double> smooth_l1_loss<double>(const Tensor<double>&, const Tensor<double>&, Reduction);

}  // namespace seismonet::nn
