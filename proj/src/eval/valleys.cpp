#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "seismonet/error.hpp"
#include "seismonet/eval.hpp"

namespace seismonet::eval {

namespace {

/// Centered moving average; the window shrinks at the edges.
std::vector<double> smooth(std::span<const float> x, std::size_t width) {
  const std::size_t n = x.size();
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + static_cast<double>(x[i]);
  const std::size_t left = (width - 1) / 2;
  const std::size_t right = width - 1 - left;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= left ? i - left : 0;
    const std::size_t hi = std::min(n, i + right + 1);
    out[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
  }
  return out;
}

/// Height of the lower of the two ridges separating x[i] from deeper ground.
double prominence(const std::vector<double>& x, std::size_t i) {
  double left = x[i];
  for (std::size_t j = i; j-- > 0;) {
    if (x[j] < x[i]) break;
    left = std::max(left, x[j]);
  }
  double right = x[i];
  for (std::size_t j = i + 1; j < x.size(); ++j) {
    if (x[j] < x[i]) break;
    right = std::max(right, x[j]);
  }
  return std::min(left, right) - x[i];
}

}  // namespace

void ValleyParams::validate() const {
  if (!(min_prominence >= 0.0) || !std::isfinite(min_prominence)) {
    throw ConfigError("eval.min_prominence", "must be a finite number >= 0");
  }
  if (!(refractory_ms > 0.0) || !std::isfinite(refractory_ms)) {
    throw ConfigError("eval.refractory_ms", "must be a finite number > 0");
  }
  if (smoothing && *smoothing == 0) throw ConfigError("eval.smoothing", "width must be >= 1");
}

std::vector<SampleIndex> detect_valleys(std::span<const float> signal, double fs, const ValleyParams& params) {
  params.validate();
  if (!(fs > 0.0)) throw ValidationError("detect_valleys: fs must be positive");
  if (signal.size() < 3) return {};
  const std::vector<double> x =
      params.smoothing ? smooth(signal, *params.smoothing) : std::vector<double>(signal.begin(), signal.end());

  std::vector<SampleIndex> candidates;
  for (std::size_t i = 1; i + 1 < x.size(); ++i) {
    if (x[i] < x[i - 1] && x[i] < x[i + 1] && prominence(x, i) >= params.min_prominence) candidates.push_back(i);
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](SampleIndex a, SampleIndex b) { return x[a] < x[b]; });

  const double gap = params.refractory_ms * fs / 1000.0;
  std::set<SampleIndex> kept;
  for (SampleIndex c : candidates) {
    const auto next = kept.lower_bound(c);
    if (next != kept.end() && static_cast<double>(*next - c) < gap) continue;
    if (next != kept.begin() && static_cast<double>(c - *std::prev(next)) < gap) continue;
    kept.insert(c);
  }
  return {kept.begin(), kept.end()};
}

}  // namespace seismonet::eval
