#include <limits>
#include <string>

#include "seismonet/error.hpp"
#include "seismonet/signal.hpp"

namespace seismonet::signal {

std::vector<std::size_t> distance_transform(std::span<const SampleIndex> annotations,
                                            std::size_t length) {
  if (length == 0) throw ValidationError("distance_transform: length must be positive");
  if (annotations.empty()) throw ValidationError("distance_transform: no annotations");

  constexpr std::size_t kFar = std::numeric_limits<std::size_t>::max() / 2;
  std::vector<std::size_t> out(length, kFar);
  for (SampleIndex p : annotations) {
    if (p >= length) {
      throw ValidationError("distance_transform: annotation " + std::to_string(p) +
                            " outside [0, " + std::to_string(length - 1) + "]");
    }
    out[p] = 0;
  }

  // Forward then backward relaxation; each pass propagates distance +1 per sample.
  for (std::size_t i = 1; i < length; ++i) {
    if (out[i - 1] + 1 < out[i]) out[i] = out[i - 1] + 1;
  }
  for (std::size_t i = length - 1; i-- > 0;) {
    if (out[i + 1] + 1 < out[i]) out[i] = out[i + 1] + 1;
  }
  return out;
}

}  // namespace seismonet::signal
