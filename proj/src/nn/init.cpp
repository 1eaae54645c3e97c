#include <cmath>
#include <random>

#include "seismonet/error.hpp"
#include "seismonet/layers.hpp"

namespace seismonet::nn {

template <typename T>
std::vector<T> xavier_uniform_init(std::size_t count, std::size_t fan_in, std::size_t fan_out, std::uint64_t seed) {
  if (fan_in == 0 || fan_out == 0) throw ValidationError("xavier_uniform_init: fans must be positive");
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-a, a);
  std::vector<T> out(count);
  for (auto& v : out) {
    v = static_cast<T>(dist(rng));
    // Narrowing to float may round just past the bound.
    if (std::abs(static_cast<double>(v)) > a) v = std::nextafter(v, T{0});
  }
  return out;
}

template std::vector<float> xavier_uniform_init<float>(std::size_t, std::size_t, std::size_t, std::uint64_t);
template std::vector<double> xavier_uniform_init<double>(std::size_t, std::size_t, std::size_t, std::uint64_t);

}  // namespace seismonet::nn
