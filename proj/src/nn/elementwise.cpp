#include <algorithm>
#include <cmath>
#include <limits>

#include "seismonet/error.hpp"
#include "seismonet/layers.hpp"

namespace seismonet::nn {

template <typename T>
Tensor<T> leaky_relu(const Tensor<T>& x, T slope) {
  if (slope < T{0}) throw ValidationError("leaky_relu: slope must be >= 0");
  Tensor<T> y(x.shape());
  const auto in = x.data();
  auto out = y.data();
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] >= T{0} ? in[i] : slope * in[i];
  return y;
}

template <typename T>
Tensor<T> leaky_relu_backward(const Tensor<T>& x, T slope, const Tensor<T>& dy) {
  if (x.shape() != dy.shape()) throw ValidationError("leaky_relu_backward: shape mismatch");
  Tensor<T> dx(x.shape());
  const auto in = x.data();
  const auto g = dy.data();
  auto out = dx.data();
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] > T{0} ? g[i] : slope * g[i];
  return dx;
}

template <typename T>
Tensor<T> LeakyRelu<T>::forward(const Tensor<T>& x) {
  input_ = x;
  T m = std::numeric_limits<T>::infinity();
  for (T v : x.data()) m = std::min(m, std::abs(v));
  min_abs_input_ = m;
  return leaky_relu(x, slope_);
}

template <typename T>
Tensor<T> LeakyRelu<T>::backward(const Tensor<T>& dy) const {
  return leaky_relu_backward(input_, slope_, dy);
}

template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.batch() != b.batch() || a.length() != b.length()) {
    throw ValidationError("concat_channels: shapes " + to_string(a.shape()) + " and " + to_string(b.shape()) +
                          " differ in batch or length");
  }
  Tensor<T> y(Shape{a.batch(), a.channels() + b.channels(), a.length()});
  for (std::size_t n = 0; n < a.batch(); ++n) {
    auto dst = y.item(n);
    const auto sa = a.item(n);
    const auto sb = b.item(n);
    std::copy(sa.begin(), sa.end(), dst.begin());
    std::copy(sb.begin(), sb.end(), dst.begin() + static_cast<std::ptrdiff_t>(sa.size()));
  }
  return y;
}

template <typename T>
std::pair<Tensor<T>, Tensor<T>> split_channels(const Tensor<T>& dy, std::size_t a_channels) {
  if (a_channels > dy.channels()) throw ValidationError("split_channels: split point beyond channel count");
  Tensor<T> da(Shape{dy.batch(), a_channels, dy.length()});
  Tensor<T> db(Shape{dy.batch(), dy.channels() - a_channels, dy.length()});
  for (std::size_t n = 0; n < dy.batch(); ++n) {
    const auto src = dy.item(n);
    const auto split = static_cast<std::ptrdiff_t>(a_channels * dy.length());
    std::copy(src.begin(), src.begin() + split, da.item(n).begin());
    std::copy(src.begin() + split, src.end(), db.item(n).begin());
  }
  return {std::move(da), std::move(db)};
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) throw ValidationError("add: shape mismatch");
  Tensor<T> y(a.shape());
  const auto sa = a.data();
  const auto sb = b.data();
  auto out = y.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = sa[i] + sb[i];
  return y;
}

namespace {

struct Tap {
  std::size_t i0;
  double frac;
};

Tap resize_tap(std::size_t j, std::size_t in_len, std::size_t out_len) {
  if (out_len == 1 || in_len == 1) return {0, 0.0};
  const double pos = static_cast<double>(j) * static_cast<double>(in_len - 1) / static_cast<double>(out_len - 1);
  auto i0 = static_cast<std::size_t>(std::floor(pos));
  if (i0 >= in_len - 1) return {in_len - 1, 0.0};
  return {i0, pos - static_cast<double>(i0)};
}

}  // namespace

template <typename T>
Tensor<T> resize_linear(const Tensor<T>& x, std::size_t out_length) {
  if (out_length == 0) throw ValidationError("resize_linear: output length must be positive");
  if (out_length == x.length()) return x;
  Tensor<T> y(Shape{x.batch(), x.channels(), out_length});
  for (std::size_t b = 0; b < x.batch(); ++b) {
    for (std::size_t c = 0; c < x.channels(); ++c) {
      const auto in = x.row(b, c);
      auto out = y.row(b, c);
      for (std::size_t j = 0; j < out_length; ++j) {
        const Tap tap = resize_tap(j, x.length(), out_length);
        const double v0 = in[tap.i0];
        const double v1 = tap.frac > 0.0 ? static_cast<double>(in[tap.i0 + 1]) : 0.0;
        out[j] = static_cast<T>((1.0 - tap.frac) * v0 + tap.frac * v1);
      }
    }
  }
  return y;
}

template <typename T>
Tensor<T> resize_linear_backward(const Tensor<T>& dy, std::size_t in_length) {
  if (dy.length() == in_length) return dy;
  Tensor<T> dx(Shape{dy.batch(), dy.channels(), in_length});
  for (std::size_t b = 0; b < dy.batch(); ++b) {
    for (std::size_t c = 0; c < dy.channels(); ++c) {
      const auto g = dy.row(b, c);
      auto out = dx.row(b, c);
      for (std::size_t j = 0; j < dy.length(); ++j) {
        const Tap tap = resize_tap(j, in_length, dy.length());
        out[tap.i0] += static_cast<T>((1.0 - tap.frac) * g[j]);
        if (tap.frac > 0.0) out[tap.i0 + 1] += static_cast<T>(tap.frac * g[j]);
      }
    }
  }
  return dx;
}

template <typename T>
Tensor<T> fit_length(const Tensor<T>& x, std::size_t out_length) {
  if (out_length == 0) throw ValidationError("fit_length: output length must be positive");
  if (out_length == x.length()) return x;
  Tensor<T> y(Shape{x.batch(), x.channels(), out_length});
  const std::size_t offset = x.length() > out_length ? (x.length() - out_length) / 2 : 0;
  const std::size_t n = std::min(out_length, x.length());
  for (std::size_t b = 0; b < x.batch(); ++b) {
    for (std::size_t c = 0; c < x.channels(); ++c) {
      const auto in = x.row(b, c);
      std::copy_n(in.begin() + static_cast<std::ptrdiff_t>(offset), n, y.row(b, c).begin());
    }
  }
  return y;
}

template <typename T>
Tensor<T> fit_length_backward(const Tensor<T>& dy, std::size_t in_length) {
  if (dy.length() == in_length) return dy;
  Tensor<T> dx(Shape{dy.batch(), dy.channels(), in_length});
  const std::size_t offset = in_length > dy.length() ? (in_length - dy.length()) / 2 : 0;
  const std::size_t n = std::min(in_length, dy.length());
  for (std::size_t b = 0; b < dy.batch(); ++b) {
    for (std::size_t c = 0; c < dy.channels(); ++c) {
      const auto g = dy.row(b, c);
      std::copy_n(g.begin(), n, dx.row(b, c).begin() + static_cast<std::ptrdiff_t>(offset));
    }
  }
  return dx;
}

#define SEISMONET_INSTANTIATE(T)                                                              \
  template Tensor<T> leaky_relu<T>(const Tensor<T>&, T);                                      \
  template Tensor<T> leaky_relu_backward<T>(const Tensor<T>&, T, const Tensor<T>&);           \
  template class LeakyRelu<T>;                                                                \
  template Tensor<T> concat_channels<T>(const Tensor<T>&, const Tensor<T>&);                  \
  template std::pair<Tensor<T>, Tensor<T>> split_channels<T>(const Tensor<T>&, std::size_t);  \
  template Tensor<T> add<T>(const Tensor<T>&, const Tensor<T>&);                              \
  template Tensor<T> resize_linear<T>(const Tensor<T>&, std::size_t);                         \
  template Tensor<T> resize_linear_backward<T>(const Tensor<T>&, std::size_t);                \
  template Tensor<T> fit_length<T>(const Tensor<T>&, std::size_t);                            \
  template Tensor<T> fit_length_backward<T>(const Tensor<T>&, std::size_t);

SEISMONET_INSTANTIATE(float)
SEISMONET_INSTANTIATE(double)
#undef SEISMONET_INSTANTIATE

}  // namespace seismonet::nn
