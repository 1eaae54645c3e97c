#include <algorithm>
#include <limits>

#include "seismonet/error.hpp"
#include "seismonet/model.hpp"

namespace seismonet::model {

template <typename T>
SeismoNet<T>::SeismoNet(const ModelConfig& config, std::uint64_t seed)
    : config_(config), plan_(make_plan(config)), params_(std::make_unique<nn::ParamStore<T>>()) {
  const std::size_t n_levels = config_.levels;
  const T slope = static_cast<T>(config_.leaky_slope);
  std::uint64_t stream = 0;

  ensemble_ = std::make_unique<EnsembleBlock<T>>(*params_, "ensemble", config_.ensemble_channels,
                                                 config_.ensemble_kernel);
  ensemble_->reset_parameters(derive_seed(seed, stream++));

  contracting_.reserve(n_levels);
  for (std::size_t n = 1; n <= n_levels; ++n) {
    contracting_.emplace_back(*params_, "ccb" + std::to_string(n), plan_.encoder_channels[n - 1], config_);
    contracting_.back().reset_parameters(derive_seed(seed, stream++));
  }

  expanding_.reserve(n_levels);
  for (std::size_t n = 1; n <= n_levels; ++n) {
    const std::size_t in_channels = n == 1 ? plan_.bottleneck_channels() : plan_.decoder_channels[n - 2];
    const std::size_t skip_channels = n == 1 ? 0 : plan_.encoder_channels[n_levels - n + 1];
    expanding_.emplace_back(*params_, "ecb" + std::to_string(n), in_channels, skip_channels,
                            plan_.encoder_lengths[n_levels - n + 1], plan_.decoder_lengths[n - 1], config_);
    expanding_.back().reset_parameters(derive_seed(seed, stream++));
  }

  denoise_ = std::make_unique<DenoisingBlock<T>>(*params_, "denoise", plan_.decoder_channels.back(),
                                                 config_.input_len, slope);
  denoise_->reset_parameters(derive_seed(seed, stream++));
}

template <typename T>
void SeismoNet<T>::check_input(const Tensor<T>& scg) const {
  if (scg.channels() != 1 || scg.length() != config_.input_len) {
    throw ValidationError("seismonet: expected input (B, 1, " + std::to_string(config_.input_len) + "), got " +
                          nn::to_string(scg.shape()));
  }
}

template <typename T>
void SeismoNet<T>::set_training(bool training) {
  training_ = training;
  for (auto& b : contracting_) b.set_training(training);
  for (auto& b : expanding_) b.set_training(training);
}

template <typename T>
Tensor<T> SeismoNet<T>::forward(const Tensor<T>& scg) {
  check_input(scg);
  const std::size_t n_levels = contracting_.size();
  std::vector<Tensor<T>> enc;
  enc.reserve(n_levels + 1);
  enc.push_back(ensemble_->forward(scg));
  for (std::size_t n = 1; n <= n_levels; ++n) enc.push_back(contracting_[n - 1].forward(enc.back()));
  Tensor<T> h = enc.back();
  for (std::size_t n = 1; n <= n_levels; ++n) {
    const Tensor<T>* skip = n == 1 ? nullptr : &enc[n_levels - n + 1];
    h = expanding_[n - 1].forward(h, skip);
  }
  return denoise_->forward(h);
}

template <typename T>
Tensor<T> SeismoNet<T>::predict(const Tensor<T>& scg) const {
  check_input(scg);
  const std::size_t n_levels = contracting_.size();
  std::vector<Tensor<T>> enc;
  enc.reserve(n_levels + 1);
  enc.push_back(ensemble_->infer(scg));
  for (std::size_t n = 1; n <= n_levels; ++n) enc.push_back(contracting_[n - 1].infer(enc.back()));
  Tensor<T> h = enc.back();
  for (std::size_t n = 1; n <= n_levels; ++n) {
    const Tensor<T>* skip = n == 1 ? nullptr : &enc[n_levels - n + 1];
    h = expanding_[n - 1].infer(h, skip);
  }
  return denoise_->infer(h);
}

template <typename T>
Tensor<T> SeismoNet<T>::backward(const Tensor<T>& dy) {
  const std::size_t n_levels = contracting_.size();
  // skip_grad[i]: gradient reaching encoder output i through a skip connection.
  std::vector<std::optional<Tensor<T>>> skip_grad(n_levels + 1);
  Tensor<T> d = denoise_->backward(dy);
  for (std::size_t n = n_levels; n >= 1; --n) {
    auto [dx, dskip] = expanding_[n - 1].backward(d);
    if (dskip) skip_grad[n_levels - n + 1] = std::move(*dskip);
    d = std::move(dx);
  }
  for (std::size_t n = n_levels; n >= 1; --n) {
    if (skip_grad[n]) d = nn::add(d, *skip_grad[n]);
    d = contracting_[n - 1].backward(d);
  }
  return ensemble_->backward(d);
}

template <typename T>
T SeismoNet<T>::activation_margin() const {
  T m = std::numeric_limits<T>::infinity();
  for (const auto& b : contracting_) {
    m = std::min({m, b.activation().min_abs_input(), b.inception().activation().min_abs_input()});
  }
  for (const auto& b : expanding_) {
    m = std::min({m, b.activation().min_abs_input(), b.inception().activation().min_abs_input()});
  }
  return std::min(m, denoise_->activation().min_abs_input());
}

template class SeismoNet<float>;
template class SeismoNet<double>;

}  // namespace seismonet::model
