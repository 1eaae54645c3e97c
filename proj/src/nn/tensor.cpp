#include "seismonet/tensor.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "seismonet/error.hpp"

namespace seismonet::nn {

std::string to_string(const Shape& s) {
  return "(" + std::to_string(s.batch) + "," + std::to_string(s.channels) + "," + std::to_string(s.length) + ")";
}

namespace {
void check_shape(const Shape& s) {
  if (s.batch == 0 || s.length == 0) throw ValidationError("tensor shape " + to_string(s) + " has a zero dim");
}
}  // namespace

template <typename T>
Tensor<T>::Tensor(Shape shape) : shape_(shape), values_(shape.numel(), T{0}) {
  check_shape(shape);
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values) : shape_(shape), values_(std::move(values)) {
  check_shape(shape);
  if (values_.size() != shape.numel()) {
    throw ValidationError("tensor buffer of " + std::to_string(values_.size()) + " values does not match shape " +
                          to_string(shape));
  }
}

template <typename T>
void Tensor<T>::fill(T v) {
  std::fill(values_.begin(), values_.end(), v);
}

template <typename T>
Parameter<T>& ParamStore<T>::add(std::string name, std::vector<std::size_t> dims, bool trainable) {
  if (find(name)) throw std::logic_error("duplicate parameter name: " + name);
  const std::size_t n = std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
  auto p = std::make_unique<Parameter<T>>();
  p->name = std::move(name);
  p->dims = std::move(dims);
  p->value.assign(n, T{0});
  p->grad.assign(n, T{0});
  p->trainable = trainable;
  params_.push_back(std::move(p));
  return *params_.back();
}

template <typename T>
Parameter<T>* ParamStore<T>::find(std::string_view name) {
  for (auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

template <typename T>
const Parameter<T>* ParamStore<T>::find(std::string_view name) const {
  for (const auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

template <typename T>
void ParamStore<T>::zero_grad() {
  for (auto& p : params_) std::fill(p->grad.begin(), p->grad.end(), T{0});
}

template <typename T>
std::size_t ParamStore<T>::trainable_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) {
    if (p->trainable) n += p->numel();
  }
  return n;
}

template class Tensor<float>;
template class Tensor<double>;
template class ParamStore<float>;
template class ParamStore<double>;

}  // namespace seismonet::nn
