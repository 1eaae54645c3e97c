#include <algorithm>
#include <string>

#include "seismonet/error.hpp"
#include "seismonet/model.hpp"

namespace seismonet::model {

namespace {

nn::ConvSpec same_conv(std::size_t in, std::size_t out, std::size_t kernel) {
  return nn::ConvSpec{in, out, kernel, 1, (kernel - 1) / 2, false};
}

/// Transposed strided conv from in_len toward target_len, padded on the right
/// by the stride remainder.
nn::ConvSpec upsample_conv(std::size_t in, std::size_t out, std::size_t in_len, std::size_t target_len,
                           const ModelConfig& config) {
  nn::ConvSpec spec{in, out, config.k_st, config.stride, (config.k_st - 1) / 2, true};
  const std::size_t base = spec.output_length(in_len);
  if (target_len > base) spec.output_padding = std::min(target_len - base, config.stride - 1);
  return spec;
}

nn::BatchNormOptions bn_options(const ModelConfig& config) { return {config.bn_momentum, config.bn_eps}; }

/// Channels [offset, offset + count) of t.
template <typename T>
Tensor<T> slice_channels(const Tensor<T>& t, std::size_t offset, std::size_t count) {
  Tensor<T> out(nn::Shape{t.batch(), count, t.length()});
  for (std::size_t b = 0; b < t.batch(); ++b) {
    for (std::size_t c = 0; c < count; ++c) {
      const auto src = t.row(b, offset + c);
      std::copy(src.begin(), src.end(), out.row(b, c).begin());
    }
  }
  return out;
}

template <typename T>
void write_channels(Tensor<T>& dst, std::size_t offset, const Tensor<T>& src) {
  for (std::size_t b = 0; b < src.batch(); ++b) {
    for (std::size_t c = 0; c < src.channels(); ++c) {
      const auto row = src.row(b, c);
      std::copy(row.begin(), row.end(), dst.row(b, offset + c).begin());
    }
  }
}

template <typename T>
void accumulate(Tensor<T>& acc, const Tensor<T>& g) {
  auto a = acc.data();
  const auto s = g.data();
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += s[i];
}

}  // namespace

// --- InceptionResidual -----------------------------------------------------------------

template <typename T>
InceptionResidual<T>::InceptionResidual(nn::ParamStore<T>& store, const std::string& name, std::size_t channels,
                                        const std::vector<std::size_t>& kernels, T slope)
    : channels_(channels), act_(slope) {
  if (channels == 0) throw ValidationError("inception: channels must be positive");
  if (kernels.empty()) throw ValidationError("inception: no branch kernels");
  // Narrow maps cannot give every branch a channel; keep the leading kernels.
  const std::size_t count = std::min(kernels.size(), channels);
  const std::size_t base = channels / count;
  branches_.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t width = base + (i == 0 ? channels % count : 0);
    branch_channels_.push_back(width);
    branches_.emplace_back(store, name + ".branch" + std::to_string(i), same_conv(channels, width, kernels[i]));
  }
}

template <typename T>
void InceptionResidual<T>::reset_parameters(std::uint64_t seed) {
  for (std::size_t i = 0; i < branches_.size(); ++i) branches_[i].reset_parameters(derive_seed(seed, i));
}

template <typename T>
Tensor<T> InceptionResidual<T>::forward(const Tensor<T>& x) {
  Tensor<T> z(x.shape());
  std::size_t offset = 0;
  for (std::size_t i = 0; i < branches_.size(); ++i) {
    write_channels(z, offset, branches_[i].forward(x));
    offset += branch_channels_[i];
  }
  accumulate(z, x);
  return act_.forward(z);
}

template <typename T>
Tensor<T> InceptionResidual<T>::infer(const Tensor<T>& x) const {
  Tensor<T> z(x.shape());
  std::size_t offset = 0;
  for (std::size_t i = 0; i < branches_.size(); ++i) {
    write_channels(z, offset, branches_[i].infer(x));
    offset += branch_channels_[i];
  }
  accumulate(z, x);
  return act_.infer(z);
}

template <typename T>
Tensor<T> InceptionResidual<T>::backward(const Tensor<T>& dy) {
  const Tensor<T> dz = act_.backward(dy);
  Tensor<T> dx = dz;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < branches_.size(); ++i) {
    accumulate(dx, branches_[i].backward(slice_channels(dz, offset, branch_channels_[i])));
    offset += branch_channels_[i];
  }
  return dx;
}

// --- EnsembleBlock ---------------------------------------------------------------------

template <typename T>
EnsembleBlock<T>::EnsembleBlock(nn::ParamStore<T>& store, const std::string& name, std::size_t channels,
                                std::size_t kernel)
    : entry_(store, name + ".entry", same_conv(1, channels, kernel)),
      mix_(store, name + ".mix", same_conv(channels, channels, 1)) {}

template <typename T>
void EnsembleBlock<T>::reset_parameters(std::uint64_t seed) {
  entry_.reset_parameters(derive_seed(seed, 0));
  mix_.reset_parameters(derive_seed(seed, 1));
}

template <typename T>
Tensor<T> EnsembleBlock<T>::forward(const Tensor<T>& x) {
  return mix_.forward(entry_.forward(x));
}

template <typename T>
Tensor<T> EnsembleBlock<T>::infer(const Tensor<T>& x) const {
  return mix_.infer(entry_.infer(x));
}

template <typename T>
Tensor<T> EnsembleBlock<T>::backward(const Tensor<T>& dy) {
  return entry_.backward(mix_.backward(dy));
}

// --- ContractingBlock ------------------------------------------------------------------

template <typename T>
ContractingBlock<T>::ContractingBlock(nn::ParamStore<T>& store, const std::string& name, std::size_t in_channels,
                                      const ModelConfig& config)
    : conv_p_(store, name + ".conv_p", same_conv(in_channels, 2 * in_channels, config.k_p), false),
      bn_(store, name + ".bn", 2 * in_channels, bn_options(config)),
      act_(static_cast<T>(config.leaky_slope)),
      conv_s_(store, name + ".conv_s",
              nn::ConvSpec{2 * in_channels, 2 * in_channels, config.k_s, config.stride, (config.k_s - 1) / 2, false}),
      inception_(store, name + ".inception", 2 * in_channels, config.inception_kernels,
                 static_cast<T>(config.leaky_slope)) {}

template <typename T>
void ContractingBlock<T>::reset_parameters(std::uint64_t seed) {
  conv_p_.reset_parameters(derive_seed(seed, 0));
  conv_s_.reset_parameters(derive_seed(seed, 1));
  inception_.reset_parameters(derive_seed(seed, 2));
}

template <typename T>
Tensor<T> ContractingBlock<T>::forward(const Tensor<T>& x) {
  return inception_.forward(conv_s_.forward(act_.forward(bn_.forward(conv_p_.forward(x)))));
}

template <typename T>
Tensor<T> ContractingBlock<T>::infer(const Tensor<T>& x) const {
  return inception_.infer(conv_s_.infer(act_.infer(bn_.infer(conv_p_.infer(x)))));
}

template <typename T>
Tensor<T> ContractingBlock<T>::backward(const Tensor<T>& dy) {
  return conv_p_.backward(bn_.backward(act_.backward(conv_s_.backward(inception_.backward(dy)))));
}

// --- ExpandingBlock --------------------------------------------------------------------

template <typename T>
ExpandingBlock<T>::ExpandingBlock(nn::ParamStore<T>& store, const std::string& name, std::size_t in_channels,
                                  std::size_t skip_channels, std::size_t in_len, std::size_t target_len,
                                  const ModelConfig& config)
    : in_channels_(in_channels),
      in_len_(in_len),
      target_len_(target_len),
      skip_proj_(skip_channels ? std::optional<nn::Conv1d<T>>(std::in_place, store, name + ".skip_proj",
                                                              same_conv(skip_channels, in_channels, 1))
                               : std::nullopt),
      conv_p_(store, name + ".conv_p",
              same_conv(in_channels * (skip_channels ? 2 : 1), in_channels * (skip_channels ? 2 : 1) / 2, config.k_p),
              false),
      bn_(store, name + ".bn", in_channels * (skip_channels ? 2 : 1) / 2, bn_options(config)),
      act_(static_cast<T>(config.leaky_slope)),
      conv_t_(store, name + ".conv_t",
              upsample_conv(in_channels * (skip_channels ? 2 : 1) / 2, in_channels * (skip_channels ? 2 : 1) / 4,
                            in_len, target_len, config)),
      inception_(store, name + ".inception", in_channels * (skip_channels ? 2 : 1) / 4, config.inception_kernels,
                 static_cast<T>(config.leaky_slope)) {
  if (in_len == 0 || target_len == 0) throw ValidationError("expanding block: lengths must be positive");
}

template <typename T>
void ExpandingBlock<T>::reset_parameters(std::uint64_t seed) {
  if (skip_proj_) skip_proj_->reset_parameters(derive_seed(seed, 0));
  conv_p_.reset_parameters(derive_seed(seed, 1));
  conv_t_.reset_parameters(derive_seed(seed, 2));
  inception_.reset_parameters(derive_seed(seed, 3));
}

template <typename T>
void ExpandingBlock<T>::check_inputs(const Tensor<T>& x, const Tensor<T>* skip) const {
  if (x.channels() != in_channels_) {
    throw ValidationError("expanding block: expected " + std::to_string(in_channels_) + " input channels, got " +
                          std::to_string(x.channels()));
  }
  if (x.length() != in_len_) {
    throw ValidationError("expanding block: expected input length " + std::to_string(in_len_) + ", got " +
                          std::to_string(x.length()));
  }
  if (!skip_proj_) {
    if (skip) throw ValidationError("expanding block: block has no skip input");
    return;
  }
  if (!skip) throw ValidationError("expanding block: skip input required");
  if (skip->batch() != x.batch() || skip->length() != x.length()) {
    throw ValidationError("expanding block: skip shape " + nn::to_string(skip->shape()) +
                          " does not match input " + nn::to_string(x.shape()));
  }
}

template <typename T>
Tensor<T> ExpandingBlock<T>::forward(const Tensor<T>& x, const Tensor<T>* skip) {
  check_inputs(x, skip);
  const Tensor<T> merged = skip_proj_ ? nn::concat_channels(x, skip_proj_->forward(*skip)) : x;
  const Tensor<T> up = conv_t_.forward(act_.forward(bn_.forward(conv_p_.forward(merged))));
  pre_fit_len_ = up.length();
  return inception_.forward(nn::fit_length(up, target_len_));
}

template <typename T>
Tensor<T> ExpandingBlock<T>::infer(const Tensor<T>& x, const Tensor<T>* skip) const {
  check_inputs(x, skip);
  const Tensor<T> merged = skip_proj_ ? nn::concat_channels(x, skip_proj_->infer(*skip)) : x;
  const Tensor<T> up = conv_t_.infer(act_.infer(bn_.infer(conv_p_.infer(merged))));
  return inception_.infer(nn::fit_length(up, target_len_));
}

template <typename T>
std::pair<Tensor<T>, std::optional<Tensor<T>>> ExpandingBlock<T>::backward(const Tensor<T>& dy) {
  const Tensor<T> dup = nn::fit_length_backward(inception_.backward(dy), pre_fit_len_);
  Tensor<T> dmerged = conv_p_.backward(bn_.backward(act_.backward(conv_t_.backward(dup))));
  if (!skip_proj_) return {std::move(dmerged), std::nullopt};
  auto [dx, dproj] = nn::split_channels(dmerged, in_channels_);
  return {std::move(dx), skip_proj_->backward(dproj)};
}

// --- DenoisingBlock --------------------------------------------------------------------

template <typename T>
DenoisingBlock<T>::DenoisingBlock(nn::ParamStore<T>& store, const std::string& name, std::size_t channels,
                                  std::size_t out_len, T slope)
    : out_len_(out_len),
      conv1_(store, name + ".conv1", same_conv(channels, channels, 3)),
      act_(slope),
      conv2_(store, name + ".conv2", same_conv(channels, 1, 3)) {
  if (out_len == 0) throw ValidationError("denoising block: output length must be positive");
}

template <typename T>
void DenoisingBlock<T>::reset_parameters(std::uint64_t seed) {
  conv1_.reset_parameters(derive_seed(seed, 0));
  conv2_.reset_parameters(derive_seed(seed, 1));
}

template <typename T>
void DenoisingBlock<T>::check_input(const Tensor<T>& x) const {
  if (x.channels() != conv1_.spec().in_channels) {
    throw ValidationError("denoising block: expected " + std::to_string(conv1_.spec().in_channels) +
                          " channels, got " + std::to_string(x.channels()));
  }
}

template <typename T>
Tensor<T> DenoisingBlock<T>::forward(const Tensor<T>& x) {
  check_input(x);
  in_len_ = x.length();
  return conv2_.forward(act_.forward(conv1_.forward(nn::resize_linear(x, out_len_))));
}

template <typename T>
Tensor<T> DenoisingBlock<T>::infer(const Tensor<T>& x) const {
  check_input(x);
  return conv2_.infer(act_.infer(conv1_.infer(nn::resize_linear(x, out_len_))));
}

template <typename T>
Tensor<T> DenoisingBlock<T>::backward(const Tensor<T>& dy) {
  return nn::resize_linear_backward(conv1_.backward(act_.backward(conv2_.backward(dy))), in_len_);
}

template class InceptionResidual<float>;
template class InceptionResidual<double>;
template class EnsembleBlock<float>;
template class EnsembleBlock<double>;
template class ContractingBlock<float>;
template class ContractingBlock<double>;
template class ExpandingBlock<float>;
template class ExpandingBlock<double>;
template class DenoisingBlock<float>;
template class DenoisingBlock<double>;

}  // namespace seismonet::model
