#include <cmath>

#include "seismonet/error.hpp"
#include "seismonet/eval.hpp"

namespace seismonet::eval {

std::vector<double> nn_intervals(std::span<const SampleIndex> peaks, double fs) {
  if (!(fs > 0.0)) throw ValidationError("nn_intervals: fs must be positive");
  if (peaks.size() < 2) throw InsufficientDataError("nn_intervals: need at least 2 peaks");
  std::vector<double> nn;
  nn.reserve(peaks.size() - 1);
  for (std::size_t i = 1; i < peaks.size(); ++i) {
    if (peaks[i] <= peaks[i - 1]) throw ValidationError("nn_intervals: peaks must be strictly increasing");
    nn.push_back(static_cast<double>(peaks[i] - peaks[i - 1]) * 1000.0 / fs);
  }
  return nn;
}

HrvIndices hrv_indices(std::span<const double> nn) {
  const std::vector<double> one(nn.begin(), nn.end());
  return hrv_indices_pooled(std::span(&one, 1));
}

HrvIndices hrv_indices_pooled(std::span<const std::vector<double>> sequences) {
  std::size_t n = 0;
  double sum = 0.0;
  for (const auto& s : sequences) {
    for (double v : s) {
      if (!std::isfinite(v) || v < 0.0) throw ValidationError("hrv_indices: intervals must be finite and >= 0");
      sum += v;
    }
    n += s.size();
  }
  if (n < 2) throw InsufficientDataError("hrv_indices: need at least 2 intervals");

  HrvIndices h;
  h.mean_nn = sum / static_cast<double>(n);
  double ss = 0.0;
  double sq_diff = 0.0;
  std::size_t diffs = 0;
  std::size_t over_50 = 0;
  for (const auto& s : sequences) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      ss += (s[i] - h.mean_nn) * (s[i] - h.mean_nn);
      if (i == 0) continue;
      const double d = s[i] - s[i - 1];
      sq_diff += d * d;
      over_50 += std::abs(d) > 50.0;
      ++diffs;
    }
  }
  if (diffs == 0) throw InsufficientDataError("hrv_indices: no successive differences");
  h.sdnn = std::sqrt(ss / static_cast<double>(n - 1));
  h.rmssd = std::sqrt(sq_diff / static_cast<double>(diffs));
  h.pnn50 = static_cast<double>(over_50) / static_cast<double>(diffs);
  return h;
}

BlandAltmanStats bland_altman(std::span<const std::pair<double, double>> pairs) {
  if (pairs.size() < 2) throw InsufficientDataError("bland_altman: need at least 2 pairs");
  BlandAltmanStats s;
  double sum = 0.0;
  for (const auto& [a, b] : pairs) {
    if (!std::isfinite(a) || !std::isfinite(b)) throw ValidationError("bland_altman: values must be finite");
    s.points.push_back({(a + b) / 2.0, a - b});
    sum += a - b;
  }
  const double n = static_cast<double>(pairs.size());
  s.mean_diff = sum / n;
  double ss = 0.0;
  for (const auto& p : s.points) ss += (p.diff - s.mean_diff) * (p.diff - s.mean_diff);
  s.sd_diff = std::sqrt(ss / (n - 1.0));
  const double half = 1.96 * s.sd_diff;
  s.loa_low = s.mean_diff - half;
  s.loa_high = s.mean_diff + half;
  s.loa_range = s.loa_high - s.loa_low;
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    if (s.points[i].diff < s.loa_low || s.points[i].diff > s.loa_high) s.outliers.push_back(i);
  }
  return s;
}

}  // namespace seismonet::eval
