#pragma once

// Reverse-mode differentiable layers for 1-D convolutional networks.
//
// Each stateful layer caches what its backward pass needs during forward().
// backward() takes dL/d(output), accumulates parameter gradients into the
// owning ParamStore and returns dL/d(input). infer() is const, caches nothing
// and uses inference-mode statistics, so a trained model can be evaluated
// from several threads at once.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "seismonet/tensor.hpp"

namespace seismonet::nn {

struct ConvSpec {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::size_t padding = 0;
  bool transposed = false;
  /// Extra samples on the right of a transposed output; must be < stride.
  std::size_t output_padding = 0;

  /// Output length for an input of `length` samples; 0 if the result would be empty.
  std::size_t output_length(std::size_t length) const;
  void validate() const;
  /// Weight dims: (out, in, kernel) for convolution, (in, out, kernel) for transposed.
  std::vector<std::size_t> weight_dims() const;
};

// --- stateless ops ------------------------------------------------------------------

template <typename T>
Tensor<T> conv1d(const Tensor<T>& x, std::span<const T> weight, std::span<const T> bias, const ConvSpec& spec);

/// Returns dL/dx; accumulates into dweight and dbias.
template <typename T>
Tensor<T> conv1d_backward(const Tensor<T>& x,
                          std::span<const T> weight,
                          const ConvSpec& spec,
                          const Tensor<T>& dy,
                          std::span<T> dweight,
                          std::span<T> dbias);

template <typename T>
Tensor<T> conv_transpose1d(const Tensor<T>& x,
                           std::span<const T> weight,
                           std::span<const T> bias,
                           const ConvSpec& spec);

template <typename T>
Tensor<T> conv_transpose1d_backward(const Tensor<T>& x,
                                    std::span<const T> weight,
                                    const ConvSpec& spec,
                                    const Tensor<T>& dy,
                                    std::span<T> dweight,
                                    std::span<T> dbias);

template <typename T>
Tensor<T> leaky_relu(const Tensor<T>& x, T slope);

/// Gradient routing for leaky_relu; slope is used at x <= 0.
template <typename T>
Tensor<T> leaky_relu_backward(const Tensor<T>& x, T slope, const Tensor<T>& dy);

template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b);

/// Splits a gradient of concat_channels(a, b) back into (da, db).
template <typename T>
std::pair<Tensor<T>, Tensor<T>> split_channels(const Tensor<T>& dy, std::size_t a_channels);

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);

/// Linear-interpolation resize along length (end points aligned).
template <typename T>
Tensor<T> resize_linear(const Tensor<T>& x, std::size_t out_length);

template <typename T>
Tensor<T> resize_linear_backward(const Tensor<T>& dy, std::size_t in_length);

/// Center-crop or right-zero-pad along length.
template <typename T>
Tensor<T> fit_length(const Tensor<T>& x, std::size_t out_length);

template <typename T>
Tensor<T> fit_length_backward(const Tensor<T>& dy, std::size_t in_length);

// --- loss ---------------------------------------------------------------------------

/// Mean: over every element. Sum: over every element. WindowSum: summed
/// within each batch item, averaged over the batch.
enum class Reduction { Mean, Sum, WindowSum };

template <typename T>
struct LossResult {
  double value = 0.0;
  Tensor<T> grad;  // dL/dpred
};

/// Elementwise Smooth-L1 of (pred - target): 0.5 x^2 for |x| < 1, |x| - 0.5 otherwise.
template <typename T>
LossResult<T> smooth_l1_loss(const Tensor<T>& pred, const Tensor<T>& target, Reduction reduction = Reduction::Mean);

double smooth_l1(double x);

// --- initialization and optimization -----------------------------------------------

/// i.i.d. uniform on [-a, a], a = sqrt(6 / (fan_in + fan_out)).
template <typename T>
std::vector<T> xavier_uniform_init(std::size_t count, std::size_t fan_in, std::size_t fan_out, std::uint64_t seed);

/// p -= lr * grad for every trainable parameter, then zeroes all gradients.
/// Throws NumericError (and leaves parameters untouched) on a non-finite gradient.
template <typename T>
void sgd_step(ParamStore<T>& params, double lr);

/// lr0 / factor^floor(epoch / step).
double lr_schedule(std::size_t epoch, double lr0, std::size_t step, double factor);

// --- stateful layers ----------------------------------------------------------------

template <typename T>
class Conv1d {
 public:
  /// Without a bias when `bias` is false (e.g. when batch norm follows).
  Conv1d(ParamStore<T>& store, const std::string& name, ConvSpec spec, bool bias = true);

  Tensor<T> forward(const Tensor<T>& x);
  Tensor<T> backward(const Tensor<T>& dy);
  Tensor<T> infer(const Tensor<T>& x) const;

  /// Xavier-uniform weights, zero bias.
  void reset_parameters(std::uint64_t seed);

  const ConvSpec& spec() const { return spec_; }
  Parameter<T>& weight() { return *weight_; }
  bool has_bias() const { return bias_ != nullptr; }
  Parameter<T>& bias() { return *bias_; }
  const Parameter<T>& weight() const { return *weight_; }
  const Parameter<T>& bias() const { return *bias_; }

 private:
  ConvSpec spec_;
  Parameter<T>* weight_;
  Parameter<T>* bias_;
  Tensor<T> input_;
};

struct BatchNormOptions {
  double momentum = 0.1;
  double eps = 1e-5;
};

/// Per-channel normalization over (batch, length). Training mode uses batch
/// statistics and updates the running estimates; inference mode uses the
/// running estimates.
template <typename T>
class BatchNorm1d {
 public:
  BatchNorm1d(ParamStore<T>& store, const std::string& name, std::size_t channels, BatchNormOptions options = {});

  Tensor<T> forward(const Tensor<T>& x);
  Tensor<T> backward(const Tensor<T>& dy);
  Tensor<T> infer(const Tensor<T>& x) const;

  void set_training(bool training) { training_ = training; }
  bool training() const { return training_; }
  std::size_t channels() const { return channels_; }
  const BatchNormOptions& options() const { return options_; }

  Parameter<T>& gamma() { return *gamma_; }
  Parameter<T>& beta() { return *beta_; }
  Parameter<T>& running_mean() { return *running_mean_; }
  Parameter<T>& running_var() { return *running_var_; }

 private:
  std::size_t channels_;
  BatchNormOptions options_;
  bool training_ = true;
  Parameter<T>* gamma_;
  Parameter<T>* beta_;
  Parameter<T>* running_mean_;
  Parameter<T>* running_var_;
  Tensor<T> x_hat_;
  std::vector<T> inv_std_;
};

template <typename T>
class LeakyRelu {
 public:
  explicit LeakyRelu(T slope = T(0.01)) : slope_(slope) {}

  Tensor<T> forward(const Tensor<T>& x);
  Tensor<T> backward(const Tensor<T>& dy) const;
  Tensor<T> infer(const Tensor<T>& x) const { return leaky_relu(x, slope_); }

  T slope() const { return slope_; }
  /// Smallest |input| seen by the last forward(); used to keep finite
  /// difference probes away from the kink.
  T min_abs_input() const { return min_abs_input_; }

 private:
  T slope_;
  Tensor<T> input_;
  T min_abs_input_ = T(0);
};

}  // namespace seismonet::nn
