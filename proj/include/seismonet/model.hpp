#pragma once

// SeismoNet: a 1-D convolutional encoder-decoder that maps an SCG window to a
// distance-transform waveform of the same length.
//
//   ensemble block -> N contracting blocks -> N expanding blocks -> denoising block
//
// Contracting block n doubles the channel count and downsamples by `stride`.
// Expanding block n (n >= 2) concatenates the decoder map with the output of
// contracting block N - n + 1, projected by a kernel-1 convolution to the
// decoder width; its output width is a quarter of the concatenated width.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "seismonet/layers.hpp"
#include "seismonet/tensor.hpp"

namespace seismonet::model {

using nn::Tensor;

struct ModelConfig {
  std::size_t levels = 5;              // N
  std::size_t base_channels = 32;      // output channels of the first contracting block
  std::size_t k_p = 3;                 // padded convolution kernel
  std::size_t k_s = 5;                 // strided convolution kernel
  std::size_t k_st = 5;                // strided transposed convolution kernel
  std::size_t stride = 2;              // downsampling factor per level
  std::size_t ensemble_channels = 16;  // must equal base_channels / 2
  std::size_t ensemble_kernel = 7;
  std::vector<std::size_t> inception_kernels{1, 3, 5};
  double leaky_slope = 0.01;
  std::size_t input_len = 2500;  // window length in samples
  double bn_momentum = 0.1;
  double bn_eps = 1e-5;

  /// Throws ConfigError naming the first violated constraint.
  void validate() const;

  /// Field-tagged `key=value` lines, one per field.
  std::string to_text() const;
  static ModelConfig from_map(const std::map<std::string, std::string>& kv);
  /// Applies one `key=value` setting; throws ConfigError on an unknown key or bad value.
  void set(const std::string& key, const std::string& value);

  bool operator==(const ModelConfig&) const = default;
};

/// Channel and length bookkeeping derived from a config.
struct LevelPlan {
  std::vector<std::size_t> encoder_channels;  // [0] ensemble output, [n] contracting block n
  std::vector<std::size_t> encoder_lengths;
  std::vector<std::size_t> decoder_channels;  // [n-1] expanding block n
  std::vector<std::size_t> decoder_lengths;

  std::size_t bottleneck_channels() const { return encoder_channels.back(); }
};

LevelPlan make_plan(const ModelConfig& config);

// --- blocks -------------------------------------------------------------------------

template <typename T>
class InceptionResidual {
 public:
  InceptionResidual(nn::ParamStore<T>& store, const std::string& name, std::size_t channels,
                    const std::vector<std::size_t>& kernels, T slope);

  Tensor<T> forward(const Tensor<T>& x);
  Tensor<T> backward(const Tensor<T>& dy);
  Tensor<T> infer(const Tensor<T>& x) const;
  void reset_parameters(std::uint64_t seed);

  std::size_t branch_count() const { return branches_.size(); }
  const std::vector<std::size_t>& branch_channels() const { return branch_channels_; }
  std::vector<nn::Conv1d<T>>& branches() { return branches_; }
  const nn::LeakyRelu<T>& activation() const { return act_; }

 private:
  std::size_t channels_;
  std::vector<nn::Conv1d<T>> branches_;
  std::vector<std::size_t> branch_channels_;
  nn::LeakyRelu<T> act_;
};

template <typename T>
class EnsembleBlock {
 public:
  EnsembleBlock(nn::ParamStore<T>& store, const std::string& name, std::size_t channels, std::size_t kernel);

  Tensor<T> forward(const Tensor<T>& x);
  Tensor<T> backward(const Tensor<T>& dy);
  Tensor<T> infer(const Tensor<T>& x) const;
  void reset_parameters(std::uint64_t seed);

 private:
  nn::Conv1d<T> entry_;
  nn::Conv1d<T> mix_;
};

template <typename T>
class ContractingBlock {
 public:
  ContractingBlock(nn::ParamStore<T>& store, const std::string& name, std::size_t in_channels,
                   const ModelConfig& config);

  Tensor<T> forward(const Tensor<T>& x);
  Tensor<T> backward(const Tensor<T>& dy);
  Tensor<T> infer(const Tensor<T>& x) const;
  void reset_parameters(std::uint64_t seed);
  void set_training(bool training) { bn_.set_training(training); }

  std::size_t out_channels() const { return conv_s_.spec().out_channels; }
  InceptionResidual<T>& inception() { return inception_; }
  const InceptionResidual<T>& inception() const { return inception_; }
  const nn::LeakyRelu<T>& activation() const { return act_; }

 private:
  nn::Conv1d<T> conv_p_;
  nn::BatchNorm1d<T> bn_;
  nn::LeakyRelu<T> act_;
  nn::Conv1d<T> conv_s_;
  InceptionResidual<T> inception_;
};

template <typename T>
class ExpandingBlock {
 public:
  /// `skip_channels` is 0 for the first expanding block, which has no skip.
  /// The transposed convolution takes `in_len` samples to `target_len`, with
  /// output padding when the stride leaves a remainder; any mismatch beyond
  /// that is cropped or zero-padded.
  ExpandingBlock(nn::ParamStore<T>& store, const std::string& name, std::size_t in_channels,
                 std::size_t skip_channels, std::size_t in_len, std::size_t target_len, const ModelConfig& config);

  Tensor<T> forward(const Tensor<T>& x, const Tensor<T>* skip);
  /// Returns (d input, d skip); d skip is empty when the block has no skip.
  std::pair<Tensor<T>, std::optional<Tensor<T>>> backward(const Tensor<T>& dy);
  Tensor<T> infer(const Tensor<T>& x, const Tensor<T>* skip) const;
  void reset_parameters(std::uint64_t seed);
  void set_training(bool training) { bn_.set_training(training); }

  std::size_t out_channels() const { return conv_t_.spec().out_channels; }
  bool has_skip() const { return skip_proj_.has_value(); }
  nn::Conv1d<T>& transposed_conv() { return conv_t_; }
  InceptionResidual<T>& inception() { return inception_; }
  const InceptionResidual<T>& inception() const { return inception_; }
  const nn::LeakyRelu<T>& activation() const { return act_; }

 private:
  void check_inputs(const Tensor<T>& x, const Tensor<T>* skip) const;

  std::size_t in_channels_;
  std::size_t in_len_;
  std::size_t target_len_;
  std::optional<nn::Conv1d<T>> skip_proj_;
  nn::Conv1d<T> conv_p_;
  nn::BatchNorm1d<T> bn_;
  nn::LeakyRelu<T> act_;
  nn::Conv1d<T> conv_t_;
  InceptionResidual<T> inception_;
  std::size_t pre_fit_len_ = 0;
};

template <typename T>
class DenoisingBlock {
 public:
  DenoisingBlock(nn::ParamStore<T>& store, const std::string& name, std::size_t channels, std::size_t out_len,
                 T slope);

  Tensor<T> forward(const Tensor<T>& x);
  Tensor<T> backward(const Tensor<T>& dy);
  Tensor<T> infer(const Tensor<T>& x) const;
  void reset_parameters(std::uint64_t seed);

  const nn::LeakyRelu<T>& activation() const { return act_; }

 private:
  void check_input(const Tensor<T>& x) const;

  std::size_t out_len_;
  nn::Conv1d<T> conv1_;
  nn::LeakyRelu<T> act_;
  nn::Conv1d<T> conv2_;
  std::size_t in_len_ = 0;
};

// --- network ------------------------------------------------------------------------

template <typename T>
class SeismoNet {
 public:
  SeismoNet(const ModelConfig& config, std::uint64_t seed);

  SeismoNet(SeismoNet&&) noexcept = default;
  SeismoNet& operator=(SeismoNet&&) noexcept = default;

  /// Training-path forward; caches activations for backward().
  Tensor<T> forward(const Tensor<T>& scg);
  /// Backpropagates dL/d(output), accumulating parameter gradients; returns dL/d(input).
  Tensor<T> backward(const Tensor<T>& dy);
  /// Inference-mode forward (running batch-norm statistics); no mutation.
  Tensor<T> predict(const Tensor<T>& scg) const;

  void set_training(bool training);
  bool training() const { return training_; }

  nn::ParamStore<T>& params() { return *params_; }
  const nn::ParamStore<T>& params() const { return *params_; }
  const ModelConfig& config() const { return config_; }
  const LevelPlan& plan() const { return plan_; }

  /// Ensemble + N contracting + N expanding + denoising.
  std::size_t block_count() const { return 2 + contracting_.size() + expanding_.size(); }
  std::size_t bottleneck_channels() const { return plan_.bottleneck_channels(); }

  /// Smallest |pre-activation| over all leaky ReLUs in the last forward().
  T activation_margin() const;

  /// Copies values from a model of the same config (possibly other precision).
  template <typename U>
  void copy_parameters_from(const SeismoNet<U>& other);

  std::vector<ContractingBlock<T>>& contracting() { return contracting_; }
  std::vector<ExpandingBlock<T>>& expanding() { return expanding_; }

 private:
  void check_input(const Tensor<T>& scg) const;

  ModelConfig config_;
  LevelPlan plan_;
  std::unique_ptr<nn::ParamStore<T>> params_;
  std::unique_ptr<EnsembleBlock<T>> ensemble_;
  std::vector<ContractingBlock<T>> contracting_;
  std::vector<ExpandingBlock<T>> expanding_;
  std::unique_ptr<DenoisingBlock<T>> denoise_;
  bool training_ = true;
};

template <typename T>
template <typename U>
void SeismoNet<T>::copy_parameters_from(const SeismoNet<U>& other) {
  if (!(other.config() == config_)) throw std::invalid_argument("copy_parameters_from: config mismatch");
  for (std::size_t i = 0; i < params_->size(); ++i) {
    auto& dst = (*params_)[i].value;
    const auto& src = other.params()[i].value;
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = static_cast<T>(src[j]);
  }
}

/// Deterministic per-layer seed derived from a model seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// --- checkpoints ----------------------------------------------------------------------

inline constexpr char kCheckpointMagic[4] = {'S', 'M', 'N', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct LoadedCheckpoint {
  SeismoNet<float> model;
  std::size_t epoch = 0;
};

/// Binary checkpoint: magic, version, length-prefixed config text, then
/// (name, rank, dims, float32 values) per tensor, all little-endian.
void save_checkpoint(const SeismoNet<float>& model, const std::filesystem::path& path, std::size_t epoch = 0);
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

extern template class SeismoNet<float>;
extern template class SeismoNet<double>;

}  // namespace seismonet::model
