#include <cmath>

#include "seismonet/error.hpp"
#include "seismonet/layers.hpp"
#include "seismonet/simd.hpp"

namespace seismonet::nn {

template <typename T>
BatchNorm1d<T>::BatchNorm1d(ParamStore<T>& store, const std::string& name, std::size_t channels,
                            BatchNormOptions options)
    : channels_(channels), options_(options) {
  if (channels == 0) throw ValidationError("batchnorm: channels must be positive");
  if (!(options.eps > 0.0)) throw ValidationError("batchnorm: eps must be positive");
  if (!(options.momentum > 0.0 && options.momentum <= 1.0)) {
    throw ValidationError("batchnorm: momentum must be in (0, 1]");
  }
  gamma_ = &store.add(name + ".gamma", {channels});
  beta_ = &store.add(name + ".beta", {channels});
  running_mean_ = &store.add(name + ".running_mean", {channels}, false);
  running_var_ = &store.add(name + ".running_var", {channels}, false);
  std::fill(gamma_->value.begin(), gamma_->value.end(), T{1});
  std::fill(running_var_->value.begin(), running_var_->value.end(), T{1});
}

template <typename T>
Tensor<T> BatchNorm1d<T>::infer(const Tensor<T>& x) const {
  if (x.channels() != channels_) throw ValidationError("batchnorm: channel mismatch");
  Tensor<T> y(x.shape());
  for (std::size_t c = 0; c < channels_; ++c) {
    const double inv = 1.0 / std::sqrt(static_cast<double>(running_var_->value[c]) + options_.eps);
    const T scale = static_cast<T>(gamma_->value[c] * inv);
    const T shift = static_cast<T>(beta_->value[c] - gamma_->value[c] * running_mean_->value[c] * inv);
    for (std::size_t b = 0; b < x.batch(); ++b) simd::affine(scale, shift, x.row(b, c), y.row(b, c));
  }
  return y;
}

template <typename T>
Tensor<T> BatchNorm1d<T>::forward(const Tensor<T>& x) {
  if (x.channels() != channels_) throw ValidationError("batchnorm: channel mismatch");
  const std::size_t count = x.batch() * x.length();
  if (training_ && count < 2) {
    throw ValidationError("batchnorm: training mode needs at least 2 values per channel");
  }
  x_hat_ = Tensor<T>(x.shape());
  inv_std_.assign(channels_, T{0});
  Tensor<T> y(x.shape());
  for (std::size_t c = 0; c < channels_; ++c) {
    double mean = 0.0;
    double var = 0.0;
    if (training_) {
      for (std::size_t b = 0; b < x.batch(); ++b) mean += static_cast<double>(simd::sum(x.row(b, c)));
      mean /= static_cast<double>(count);
      for (std::size_t b = 0; b < x.batch(); ++b) {
        for (T v : x.row(b, c)) {
          const double d = static_cast<double>(v) - mean;
          var += d * d;
        }
      }
      const double unbiased = var / static_cast<double>(count - 1);
      var /= static_cast<double>(count);
      const double m = options_.momentum;
      running_mean_->value[c] = static_cast<T>((1.0 - m) * running_mean_->value[c] + m * mean);
      running_var_->value[c] = static_cast<T>((1.0 - m) * running_var_->value[c] + m * unbiased);
    } else {
      mean = running_mean_->value[c];
      var = running_var_->value[c];
    }
    const double inv = 1.0 / std::sqrt(var + options_.eps);
    inv_std_[c] = static_cast<T>(inv);
    for (std::size_t b = 0; b < x.batch(); ++b) {
      auto xh = x_hat_.row(b, c);
      simd::affine(static_cast<T>(inv), static_cast<T>(-mean * inv), x.row(b, c), xh);
      simd::affine(gamma_->value[c], beta_->value[c], std::span<const T>(xh), y.row(b, c));
    }
  }
  return y;
}

template <typename T>
Tensor<T> BatchNorm1d<T>::backward(const Tensor<T>& dy) {
  if (dy.shape() != x_hat_.shape()) throw ValidationError("batchnorm backward: gradient shape mismatch");
  Tensor<T> dx(dy.shape());
  const double count = static_cast<double>(dy.batch() * dy.length());
  for (std::size_t c = 0; c < channels_; ++c) {
    double sum_dy = 0.0;
    double sum_dy_xhat = 0.0;
    for (std::size_t b = 0; b < dy.batch(); ++b) {
      sum_dy += static_cast<double>(simd::sum(dy.row(b, c)));
      sum_dy_xhat += static_cast<double>(simd::dot(dy.row(b, c), x_hat_.row(b, c)));
    }
    gamma_->grad[c] += static_cast<T>(sum_dy_xhat);
    beta_->grad[c] += static_cast<T>(sum_dy);
    const double g = static_cast<double>(gamma_->value[c]) * inv_std_[c];
    for (std::size_t b = 0; b < dy.batch(); ++b) {
      auto dxr = dx.row(b, c);
      const auto dyr = dy.row(b, c);
      const auto xh = x_hat_.row(b, c);
      if (training_) {
        // dx = g * (dy - mean(dy) - x_hat * mean(dy * x_hat))
        const double mdy = sum_dy / count;
        const double mdx = sum_dy_xhat / count;
        for (std::size_t t = 0; t < dxr.size(); ++t) {
          dxr[t] = static_cast<T>(g * (static_cast<double>(dyr[t]) - mdy - static_cast<double>(xh[t]) * mdx));
        }
      } else {
        simd::affine(static_cast<T>(g), T{0}, dyr, dxr);
      }
    }
  }
  return dx;
}

template class BatchNorm1d<float>;
template class BatchNorm1d<double>;

}  // namespace seismonet::nn
