#include <cmath>

#include "seismonet/error.hpp"
#include "seismonet/layers.hpp"

namespace seismonet::nn {

template <typename T>
void sgd_step(ParamStore<T>& params, double lr) {
  for (const auto& p : params) {
    if (!p->trainable) continue;
    for (std::size_t i = 0; i < p->grad.size(); ++i) {
      if (!std::isfinite(static_cast<double>(p->grad[i]))) {
        throw NumericError("sgd_step: non-finite gradient in " + p->name + "[" + std::to_string(i) + "]");
      }
    }
  }
  for (auto& p : params) {
    if (!p->trainable) continue;
    const T step = static_cast<T>(lr);
    for (std::size_t i = 0; i < p->value.size(); ++i) p->value[i] -= step * p->grad[i];
  }
  params.zero_grad();
}

double lr_schedule(std::size_t epoch, double lr0, std::size_t step, double factor) {
  if (step == 0) throw ValidationError("lr_schedule: step must be >= 1");
  if (!(factor > 1.0)) throw ValidationError("lr_schedule: factor must be > 1");
  const auto drops = static_cast<double>(epoch / step);
  return lr0 / std::pow(factor, drops);
}

template void sgd_step<float>(ParamStore<float>&, double);
template void sgd_step<double>(ParamStore<double>&, double);

}  // namespace seismonet::nn
