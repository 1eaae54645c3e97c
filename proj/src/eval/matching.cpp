#include <algorithm>
#include <cmath>
#include <tuple>

#include "seismonet/error.hpp"
#include "seismonet/eval.hpp"

namespace seismonet::eval {

MatchCounts match_peaks(std::span<const SampleIndex> detected, std::span<const SampleIndex> actual, double tol_ms,
                        double fs) {
  if (!(fs > 0.0)) throw ValidationError("match_peaks: fs must be positive");
  if (!(tol_ms >= 0.0)) throw ValidationError("match_peaks: tolerance must be >= 0");
  if (!std::is_sorted(detected.begin(), detected.end()) || !std::is_sorted(actual.begin(), actual.end())) {
    throw ValidationError("match_peaks: inputs must be sorted");
  }
  const double tol = tol_ms * fs / 1000.0;

  // (distance, actual index, detected index)
  std::vector<std::tuple<SampleIndex, std::size_t, std::size_t>> pairs;
  for (std::size_t a = 0; a < actual.size(); ++a) {
    const SampleIndex lo = actual[a] > tol ? actual[a] - static_cast<SampleIndex>(std::floor(tol)) : 0;
    for (auto it = std::lower_bound(detected.begin(), detected.end(), lo); it != detected.end(); ++it) {
      const SampleIndex d = *it > actual[a] ? *it - actual[a] : actual[a] - *it;
      if (*it > actual[a] && static_cast<double>(d) > tol) break;
      if (static_cast<double>(d) <= tol) pairs.emplace_back(d, a, static_cast<std::size_t>(it - detected.begin()));
    }
  }
  std::sort(pairs.begin(), pairs.end());

  std::vector<bool> used_a(actual.size()), used_d(detected.size());
  MatchCounts counts;
  for (const auto& [dist, a, d] : pairs) {
    if (used_a[a] || used_d[d]) continue;
    used_a[a] = used_d[d] = true;
    ++counts.tp;
  }
  counts.fp = detected.size() - counts.tp;
  counts.fn = actual.size() - counts.tp;
  return counts;
}

std::optional<double> sensitivity(std::size_t tp, std::size_t fn) {
  if (tp + fn == 0) return std::nullopt;
  return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

std::optional<double> ppv(std::size_t tp, std::size_t fp) {
  if (tp + fp == 0) return std::nullopt;
  return static_cast<double>(tp) / static_cast<double>(tp + fp);
}

PeakMatchRow PeakMatchReport::total() const {
  PeakMatchRow t;
  t.subject = "total";
  for (const auto& r : rows) {
    t.detected += r.detected;
    t.actual += r.actual;
    t.counts += r.counts;
  }
  return t;
}

}  // namespace seismonet::eval
