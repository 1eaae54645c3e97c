#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace seismonet::nn {

/// (batch, channels, length). Channels may be zero for an empty feature map.
struct Shape {
  std::size_t batch = 1;
  std::size_t channels = 1;
  std::size_t length = 1;

  std::size_t numel() const { return batch * channels * length; }
  bool operator==(const Shape&) const = default;
};

std::string to_string(const Shape& s);

/// Dense (batch, channels, length) buffer, row-major with length fastest.
/// Activations flow forward as Tensors and gradients flow backward as Tensors
/// of the same shape; trainable state lives in Parameter.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<T> values);

  const Shape& shape() const { return shape_; }
  std::size_t batch() const { return shape_.batch; }
  std::size_t channels() const { return shape_.channels; }
  std::size_t length() const { return shape_.length; }
  std::size_t numel() const { return values_.size(); }

  std::span<T> data() { return values_; }
  std::span<const T> data() const { return values_; }
  std::vector<T>& values() { return values_; }
  const std::vector<T>& values() const { return values_; }

  /// One (batch, channel) row of `length` samples.
  std::span<T> row(std::size_t b, std::size_t c) {
    return {values_.data() + (b * shape_.channels + c) * shape_.length, shape_.length};
  }
  std::span<const T> row(std::size_t b, std::size_t c) const {
    return {values_.data() + (b * shape_.channels + c) * shape_.length, shape_.length};
  }
  /// All channels of one batch item.
  std::span<T> item(std::size_t b) {
    return {values_.data() + b * shape_.channels * shape_.length, shape_.channels * shape_.length};
  }
  std::span<const T> item(std::size_t b) const {
    return {values_.data() + b * shape_.channels * shape_.length, shape_.channels * shape_.length};
  }

  T& at(std::size_t b, std::size_t c, std::size_t t) {
    return values_[(b * shape_.channels + c) * shape_.length + t];
  }
  const T& at(std::size_t b, std::size_t c, std::size_t t) const {
    return values_[(b * shape_.channels + c) * shape_.length + t];
  }

  void fill(T v);

 private:
  Shape shape_{};
  std::vector<T> values_;
};

/// Trainable (or buffer) state with a gradient accumulator of identical size.
template <typename T>
struct Parameter {
  std::string name;
  std::vector<std::size_t> dims;
  std::vector<T> value;
  std::vector<T> grad;
  bool trainable = true;

  std::size_t numel() const { return value.size(); }
};

/// Owns every parameter of a model in registration order. Names are unique
/// and iteration order is deterministic; addresses are stable for the
/// lifetime of the store.
template <typename T>
class ParamStore {
 public:
  ParamStore() = default;
  ParamStore(const ParamStore&) = delete;
  ParamStore& operator=(const ParamStore&) = delete;
  ParamStore(ParamStore&&) noexcept = default;
  ParamStore& operator=(ParamStore&&) noexcept = default;

  /// Registers a zero-initialized parameter. Throws on duplicate names.
  Parameter<T>& add(std::string name, std::vector<std::size_t> dims, bool trainable = true);

  Parameter<T>* find(std::string_view name);
  const Parameter<T>* find(std::string_view name) const;

  std::size_t size() const { return params_.size(); }
  Parameter<T>& operator[](std::size_t i) { return *params_[i]; }
  const Parameter<T>& operator[](std::size_t i) const { return *params_[i]; }

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_grad();
  /// Total number of trainable scalars.
  std::size_t trainable_count() const;

 private:
  std::vector<std::unique_ptr<Parameter<T>>> params_;
};

extern template class Tensor<float>;
extern template class Tensor<double>;
extern template class ParamStore<float>;
extern template class ParamStore<double>;

}  // namespace seismonet::nn
