#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "seismonet/error.hpp"
#include "seismonet/signal.hpp"

namespace seismonet::signal {

namespace {

constexpr double kIntegrationS = 0.150;
constexpr double kRefractoryS = 0.200;
constexpr double kThresholdSpanS = 1.0;  // half-width of the adaptive-threshold window
constexpr double kThresholdFraction = 0.3;

// Sliding maximum over [i - half, i + half].
std::vector<double> sliding_max(const std::vector<double>& x, std::size_t half) {
  const std::size_t n = x.size();
  std::vector<double> out(n);
  std::deque<std::size_t> dq;
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t hi = std::min(n - 1, i + half);
    while (next <= hi) {
      while (!dq.empty() && x[dq.back()] <= x[next]) dq.pop_back();
      dq.push_back(next++);
    }
    while (dq.front() + half < i) dq.pop_front();
    out[i] = x[dq.front()];
  }
  return out;
}

}  // namespace

std::vector<SampleIndex> annotate_ecg_rpeaks(std::span<const double> ecg, double fs) {
  if (!(fs > 0.0)) throw ValidationError("annotate_ecg_rpeaks: fs must be positive");
  const std::size_t n = ecg.size();
  if (static_cast<double>(n) < 2.0 * fs) {
    throw ValidationError("annotate_ecg_rpeaks: need at least 2 s of signal");
  }

  // Differentiate and square.
  std::vector<double> sq(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double d = 0.5 * fs * (ecg[i + 1] - ecg[i - 1]);
    sq[i] = d * d;
  }

  // Centered moving-window integration.
  const std::size_t half_int = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(kIntegrationS * fs / 2)));
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + sq[i];
  std::vector<double> env(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half_int ? i - half_int : 0;
    const std::size_t hi = std::min(n, i + half_int + 1);
    env[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
  }

  const double global_max = *std::max_element(env.begin(), env.end());
  if (!(global_max > 0.0)) return {};

  const auto local_max = sliding_max(env, static_cast<std::size_t>(std::lround(kThresholdSpanS * fs)));

  struct Candidate {
    std::size_t index;
    double height;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double thr = std::max(kThresholdFraction * local_max[i], 1e-3 * global_max);
    if (env[i] > thr && env[i] >= env[i - 1] && env[i] > env[i + 1]) candidates.push_back({i, env[i]});
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.height > b.height; });

  const auto refractory = static_cast<std::size_t>(std::lround(kRefractoryS * fs));
  std::vector<std::size_t> accepted;
  for (const auto& c : candidates) {
    const bool clash = std::any_of(accepted.begin(), accepted.end(), [&](std::size_t a) {
      return (a > c.index ? a - c.index : c.index - a) < refractory;
    });
    if (!clash) accepted.push_back(c.index);
  }

  // Snap each envelope peak to the largest ECG sample inside the integration window.
  std::vector<SampleIndex> peaks;
  peaks.reserve(accepted.size());
  for (std::size_t a : accepted) {
    const std::size_t lo = a >= half_int ? a - half_int : 0;
    const std::size_t hi = std::min(n - 1, a + half_int);
    std::size_t best = lo;
    for (std::size_t i = lo + 1; i <= hi; ++i) {
      if (ecg[i] > ecg[best]) best = i;
    }
    peaks.push_back(best);
  }
  std::sort(peaks.begin(), peaks.end());
  peaks.erase(std::unique(peaks.begin(), peaks.end()), peaks.end());
  return peaks;
}

}  // namespace seismonet::signal
