#pragma once

// Helpers shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "seismonet/grad_check.hpp"
#include "seismonet/tensor.hpp"

namespace seismonet::testing {

inline std::vector<double> uniform(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

inline nn::Tensor<double> random_tensor(nn::Shape shape, std::mt19937_64& rng) {
  return nn::Tensor<double>(shape, uniform(shape.numel(), rng));
}

inline std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("seismonet_" + tag + "_" + std::to_string(rd()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Finite-difference check of a module over its input and every trainable
/// parameter in `store` (may be null). The scalar under test is
/// sum(r * forward(x)) for a fixed random r, so backward receives r.
struct ModuleProbe {
  std::function<nn::Tensor<double>(const nn::Tensor<double>&)> forward;
  std::function<nn::Tensor<double>(const nn::Tensor<double>&)> backward;
  nn::ParamStore<double>* store = nullptr;
};

inline nn::GradCheckResult check_module(const ModuleProbe& probe, nn::Tensor<double> x, std::mt19937_64& rng) {
  std::vector<nn::Parameter<double>*> params;
  if (probe.store) {
    for (auto& p : *probe.store) {
      if (p->trainable) params.push_back(p.get());
    }
  }
  const auto y0 = probe.forward(x);
  const auto r = random_tensor(y0.shape(), rng);

  std::vector<double> theta(x.values());
  for (auto* p : params) theta.insert(theta.end(), p->value.begin(), p->value.end());

  auto load = [&](std::span<const double> t) {
    std::size_t k = 0;
    for (auto& v : x.values()) v = t[k++];
    for (auto* p : params) {
      for (auto& v : p->value) v = t[k++];
    }
  };
  auto loss = [&](std::span<const double> t) {
    load(t);
    const auto y = probe.forward(x);
    double s = 0.0;
    for (std::size_t i = 0; i < y.numel(); ++i) s += r.values()[i] * y.values()[i];
    return s;
  };

  load(theta);
  if (probe.store) probe.store->zero_grad();
  probe.forward(x);
  const auto dx = probe.backward(r);
  std::vector<double> analytic(dx.values());
  for (auto* p : params) analytic.insert(analytic.end(), p->grad.begin(), p->grad.end());
  return nn::grad_check(loss, theta, analytic);
}

}  // namespace seismonet::testing
