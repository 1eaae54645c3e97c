#include <algorithm>
#include <string>

#include "seismonet/error.hpp"
#include "seismonet/layers.hpp"
#include "seismonet/simd.hpp"

namespace seismonet::nn {

std::size_t ConvSpec::output_length(std::size_t length) const {
  if (transposed) {
    const std::size_t full = (length - 1) * stride + kernel + output_padding;
    return full > 2 * padding ? full - 2 * padding : 0;
  }
  if (length + 2 * padding < kernel) return 0;
  return (length + 2 * padding - kernel) / stride + 1;
}

void ConvSpec::validate() const {
  if (in_channels == 0 || out_channels == 0) throw ValidationError("conv: channel counts must be positive");
  if (kernel == 0) throw ValidationError("conv: kernel must be positive");
  if (stride == 0) throw ValidationError("conv: stride must be positive");
  if (output_padding > 0 && (!transposed || output_padding >= stride)) {
    throw ValidationError("conv: output_padding needs a transposed conv and must be < stride");
  }
}

std::vector<std::size_t> ConvSpec::weight_dims() const {
  return transposed ? std::vector<std::size_t>{in_channels, out_channels, kernel}
                    : std::vector<std::size_t>{out_channels, in_channels, kernel};
}

namespace {

// Valid column range [lo, hi) for tap k: 0 <= t*stride + k - pad < src_len.
std::pair<std::size_t, std::size_t> tap_range(std::size_t k,
                                              std::size_t stride,
                                              std::size_t pad,
                                              std::size_t src_len,
                                              std::size_t cols) {
  std::size_t lo = 0;
  if (pad > k) lo = (pad - k + stride - 1) / stride;
  if (src_len + pad <= k) return {0, 0};
  std::size_t hi = (src_len + pad - k + stride - 1) / stride;
  hi = std::min(hi, cols);
  if (lo > hi) lo = hi;
  return {lo, hi};
}

// col[(c*K + k) * cols + t] = src[c * src_len + t*stride + k - pad], zero outside.
template <typename T>
void im2col(const T* src, std::size_t channels, std::size_t src_len, std::size_t kernel, std::size_t stride,
            std::size_t pad, std::size_t cols, T* col) {
  std::fill(col, col + channels * kernel * cols, T{0});
  for (std::size_t c = 0; c < channels; ++c) {
    const T* s = src + c * src_len;
    for (std::size_t k = 0; k < kernel; ++k) {
      T* dst = col + (c * kernel + k) * cols;
      const auto [lo, hi] = tap_range(k, stride, pad, src_len, cols);
      if (stride == 1) {
        std::copy(s + lo + k - pad, s + hi + k - pad, dst + lo);
      } else {
        for (std::size_t t = lo; t < hi; ++t) dst[t] = s[t * stride + k - pad];
      }
    }
  }
}

// Adjoint of im2col: dst[c * dst_len + t*stride + k - pad] += col[(c*K + k) * cols + t].
template <typename T>
void col2im(const T* col, std::size_t channels, std::size_t dst_len, std::size_t kernel, std::size_t stride,
            std::size_t pad, std::size_t cols, T* dst) {
  for (std::size_t c = 0; c < channels; ++c) {
    T* d = dst + c * dst_len;
    for (std::size_t k = 0; k < kernel; ++k) {
      const T* src = col + (c * kernel + k) * cols;
      const auto [lo, hi] = tap_range(k, stride, pad, dst_len, cols);
      if (stride == 1) {
        if (hi > lo) {
          simd::axpy(T{1}, std::span<const T>(src + lo, hi - lo), std::span<T>(d + lo + k - pad, hi - lo));
        }
      } else {
        for (std::size_t t = lo; t < hi; ++t) d[t * stride + k - pad] += src[t];
      }
    }
  }
}

template <typename T>
void check_weights(const ConvSpec& spec, std::span<const T> weight, std::span<const T> bias) {
  const std::size_t expected = spec.in_channels * spec.out_channels * spec.kernel;
  if (weight.size() != expected) {
    throw ValidationError("conv: weight has " + std::to_string(weight.size()) + " values, expected " +
                          std::to_string(expected));
  }
  if (!bias.empty() && bias.size() != spec.out_channels) throw ValidationError("conv: bias size mismatch");
}

template <typename T>
void check_input(const Tensor<T>& x, const ConvSpec& spec, bool transposed) {
  spec.validate();
  if (spec.transposed != transposed) {
    throw ValidationError(transposed ? "conv_transpose1d: spec is not transposed" : "conv1d: spec is transposed");
  }
  if (x.channels() != spec.in_channels) {
    throw ValidationError("conv: input has " + std::to_string(x.channels()) + " channels, spec expects " +
                          std::to_string(spec.in_channels));
  }
  if (spec.output_length(x.length()) < 1) {
    throw ValidationError("conv: output length < 1 for input length " + std::to_string(x.length()));
  }
}

}  // namespace

template <typename T>
Tensor<T> conv1d(const Tensor<T>& x, std::span<const T> weight, std::span<const T> bias, const ConvSpec& spec) {
  check_input(x, spec, false);
  check_weights(spec, weight, bias);
  const std::size_t lin = x.length();
  const std::size_t lout = spec.output_length(lin);
  const std::size_t ik = spec.in_channels * spec.kernel;
  Tensor<T> y(Shape{x.batch(), spec.out_channels, lout});
  std::vector<T> col(ik * lout);
  for (std::size_t b = 0; b < x.batch(); ++b) {
    im2col(x.item(b).data(), spec.in_channels, lin, spec.kernel, spec.stride, spec.padding, lout, col.data());
    for (std::size_t o = 0; o < spec.out_channels; ++o) {
      auto yrow = y.row(b, o);
      std::fill(yrow.begin(), yrow.end(), bias.empty() ? T{0} : bias[o]);
      const T* w = weight.data() + o * ik;
      for (std::size_t j = 0; j < ik; ++j) {
        simd::axpy(w[j], std::span<const T>(col.data() + j * lout, lout), yrow);
      }
    }
  }
  return y;
}

template <typename T>
Tensor<T> conv1d_backward(const Tensor<T>& x,
                          std::span<const T> weight,
                          const ConvSpec& spec,
                          const Tensor<T>& dy,
                          std::span<T> dweight,
                          std::span<T> dbias) {
  const std::size_t lin = x.length();
  const std::size_t lout = spec.output_length(lin);
  if (dy.shape() != Shape{x.batch(), spec.out_channels, lout}) {
    throw ValidationError("conv1d_backward: gradient shape " + to_string(dy.shape()) + " does not match output");
  }
  const std::size_t ik = spec.in_channels * spec.kernel;
  Tensor<T> dx(x.shape());
  std::vector<T> col(ik * lout);
  std::vector<T> dcol(ik * lout);
  for (std::size_t b = 0; b < x.batch(); ++b) {
    im2col(x.item(b).data(), spec.in_channels, lin, spec.kernel, spec.stride, spec.padding, lout, col.data());
    std::fill(dcol.begin(), dcol.end(), T{0});
    for (std::size_t o = 0; o < spec.out_channels; ++o) {
      const auto dyrow = dy.row(b, o);
      if (!dbias.empty()) dbias[o] += simd::sum(dyrow);
      const T* w = weight.data() + o * ik;
      T* dw = dweight.data() + o * ik;
      for (std::size_t j = 0; j < ik; ++j) {
        const std::span<const T> colrow(col.data() + j * lout, lout);
        dw[j] += simd::dot(dyrow, colrow);
        simd::axpy(w[j], dyrow, std::span<T>(dcol.data() + j * lout, lout));
      }
    }
    col2im(dcol.data(), spec.in_channels, lin, spec.kernel, spec.stride, spec.padding, lout, dx.item(b).data());
  }
  return dx;
}

template <typename T>
Tensor<T> conv_transpose1d(const Tensor<T>& x,
                           std::span<const T> weight,
                           std::span<const T> bias,
                           const ConvSpec& spec) {
  check_input(x, spec, true);
  check_weights(spec, weight, bias);
  const std::size_t lin = x.length();
  const std::size_t lout = spec.output_length(lin);
  const std::size_t ok = spec.out_channels * spec.kernel;
  Tensor<T> y(Shape{x.batch(), spec.out_channels, lout});
  std::vector<T> col(ok * lin);
  for (std::size_t b = 0; b < x.batch(); ++b) {
    std::fill(col.begin(), col.end(), T{0});
    for (std::size_t i = 0; i < spec.in_channels; ++i) {
      const auto xrow = x.row(b, i);
      const T* w = weight.data() + i * ok;
      for (std::size_t j = 0; j < ok; ++j) {
        simd::axpy(w[j], xrow, std::span<T>(col.data() + j * lin, lin));
      }
    }
    for (std::size_t o = 0; o < spec.out_channels; ++o) {
      auto yrow = y.row(b, o);
      std::fill(yrow.begin(), yrow.end(), bias.empty() ? T{0} : bias[o]);
    }
    col2im(col.data(), spec.out_channels, lout, spec.kernel, spec.stride, spec.padding, lin, y.item(b).data());
  }
  return y;
}

template <typename T>
Tensor<T> conv_transpose1d_backward(const Tensor<T>& x,
                                    std::span<const T> weight,
                                    const ConvSpec& spec,
                                    const Tensor<T>& dy,
                                    std::span<T> dweight,
                                    std::span<T> dbias) {
  const std::size_t lin = x.length();
  const std::size_t lout = spec.output_length(lin);
  if (dy.shape() != Shape{x.batch(), spec.out_channels, lout}) {
    throw ValidationError("conv_transpose1d_backward: gradient shape " + to_string(dy.shape()) +
                          " does not match output");
  }
  const std::size_t ok = spec.out_channels * spec.kernel;
  Tensor<T> dx(x.shape());
  std::vector<T> dcol(ok * lin);
  for (std::size_t b = 0; b < x.batch(); ++b) {
    im2col(dy.item(b).data(), spec.out_channels, lout, spec.kernel, spec.stride, spec.padding, lin, dcol.data());
    if (!dbias.empty()) {
      for (std::size_t o = 0; o < spec.out_channels; ++o) dbias[o] += simd::sum(dy.row(b, o));
    }
    for (std::size_t i = 0; i < spec.in_channels; ++i) {
      const auto xrow = x.row(b, i);
      auto dxrow = dx.row(b, i);
      const T* w = weight.data() + i * ok;
      T* dw = dweight.data() + i * ok;
      for (std::size_t j = 0; j < ok; ++j) {
        const std::span<const T> dcolrow(dcol.data() + j * lin, lin);
        dw[j] += simd::dot(xrow, dcolrow);
        simd::axpy(w[j], dcolrow, dxrow);
      }
    }
  }
  return dx;
}

template <typename T>
Conv1d<T>::Conv1d(ParamStore<T>& store, const std::string& name, ConvSpec spec, bool bias) : spec_(spec) {
  spec_.validate();
  weight_ = &store.add(name + ".weight", spec_.weight_dims());
  bias_ = bias ? &store.add(name + ".bias", {spec_.out_channels}) : nullptr;
}

template <typename T>
void Conv1d<T>::reset_parameters(std::uint64_t seed) {
  weight_->value = xavier_uniform_init<T>(weight_->numel(), spec_.in_channels * spec_.kernel,
                                          spec_.out_channels * spec_.kernel, seed);
  if (bias_) std::fill(bias_->value.begin(), bias_->value.end(), T{0});
}

template <typename T>
Tensor<T> Conv1d<T>::infer(const Tensor<T>& x) const {
  const std::span<const T> bias = bias_ ? std::span<const T>(bias_->value) : std::span<const T>();
  return spec_.transposed ? conv_transpose1d<T>(x, weight_->value, bias, spec_) : conv1d<T>(x, weight_->value, bias, spec_);
}

template <typename T>
Tensor<T> Conv1d<T>::forward(const Tensor<T>& x) {
  input_ = x;
  return infer(x);
}

template <typename T>
Tensor<T> Conv1d<T>::backward(const Tensor<T>& dy) {
  const std::span<T> dbias = bias_ ? std::span<T>(bias_->grad) : std::span<T>();
  return spec_.transposed ? conv_transpose1d_backward<T>(input_, weight_->value, spec_, dy, weight_->grad, dbias)
                          : conv1d_backward<T>(input_, weight_->value, spec_, dy, weight_->grad, dbias);
}

#define SEISMONET_INSTANTIATE(T)                                                                        \
  template Tensor<T> conv1d<T>(const Tensor<T>&, std::span<const T>, std::span<const T>, const ConvSpec&); \
  template Tensor<T> conv1d_backward<T>(const Tensor<T>&, std::span<const T>, const ConvSpec&,            \
                                        const Tensor<T>&, std::span<T>, std::span<T>);                    \
  template Tensor<T> conv_transpose1d<T>(const Tensor<T>&, std::span<const T>, std::span<const T>,        \
                                         const ConvSpec&);                                                \
  template Tensor<T> conv_transpose1d_backward<T>(const Tensor<T>&, std::span<const T>, const ConvSpec&,  \
                                                  const Tensor<T>&, std::span<T>, std::span<T>);          \
  template class Conv1d<T>;

SEISMONET_INSTANTIATE(float)
SEISMONET_INSTANTIATE(double)
#undef SEISMONET_INSTANTIATE

}  // namespace seismonet::nn
