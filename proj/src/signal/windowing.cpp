#include <algorithm>
#include <cmath>

#include "seismonet/error.hpp"
#include "seismonet/signal.hpp"

namespace seismonet::signal {

namespace {

std::size_t whole_samples(double seconds, double fs, const char* what) {
  const double n = seconds * fs;
  const double rounded = std::round(n);
  if (!(n > 0.0) || std::abs(n - rounded) > 1e-6) {
    throw ValidationError(std::string("segment_windows: ") + what + " of " + std::to_string(seconds) +
                          " s is not a whole number of samples at " + std::to_string(fs) + " Hz");
  }
  return static_cast<std::size_t>(rounded);
}

}  // namespace

std::vector<Window> segment_windows(const Record& record, const WindowOptions& options) {
  record.validate();
  const std::size_t w = whole_samples(options.w_sec, record.fs, "window");
  const std::size_t hop = whole_samples(options.hop_sec, record.fs, "hop");
  const std::size_t len = record.length();
  if (len < w) {
    throw EmptyResultError("segment_windows: record " + record.subject_id + " has " + std::to_string(len) +
                           " samples, fewer than one window of " + std::to_string(w));
  }

  std::vector<Window> windows;
  windows.reserve((len - w) / hop + 1);
  for (std::size_t start = 0; start + w <= len; start += hop) {
    Window win;
    win.subject_id = record.subject_id;
    win.start = start;
    win.scg_seg.resize(w);
    for (std::size_t i = 0; i < w; ++i) win.scg_seg[i] = static_cast<float>(record.scg[start + i]);

    if (record.rpeaks) {
      const auto& peaks = *record.rpeaks;
      auto lo = std::lower_bound(peaks.begin(), peaks.end(), start);
      auto hi = std::lower_bound(lo, peaks.end(), start + w);
      std::vector<SampleIndex> local;
      local.reserve(static_cast<std::size_t>(hi - lo));
      for (auto it = lo; it != hi; ++it) local.push_back(*it - start);
      if (!local.empty()) {
        const auto dt = distance_transform(local, w);
        std::vector<float> target(w);
        for (std::size_t i = 0; i < w; ++i) {
          float v = static_cast<float>(dt[i]);
          if (options.dt_clip) v = std::min(v, *options.dt_clip);
          target[i] = v;
        }
        win.target_dt = std::move(target);
      }
      win.rpeaks_local = std::move(local);
    }
    windows.push_back(std::move(win));
  }
  return windows;
}

std::vector<Window> segment_windows(const Record& record, double w_sec, double hop_sec) {
  return segment_windows(record, WindowOptions{w_sec, hop_sec, std::nullopt});
}

DatasetSplit split_dataset(const std::map<std::string, std::vector<Window>>& windows,
                           const SplitRatios& ratios,
                           const SplitOptions& options) {
  if (!(ratios.train > 0.0 && ratios.val > 0.0 && ratios.test > 0.0)) {
    throw ValidationError("split_dataset: ratios must be positive");
  }
  if (std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    throw ValidationError("split_dataset: ratios must sum to 1");
  }

  DatasetSplit split;
  for (const auto& [subject, subject_windows] : windows) {
    const std::size_t n = subject_windows.size();
    if (n < 3) {
      throw InsufficientDataError("split_dataset: subject " + subject + " has " + std::to_string(n) +
                                  " windows, need at least 3");
    }
    std::vector<const Window*> ordered;
    ordered.reserve(n);
    for (const auto& w : subject_windows) ordered.push_back(&w);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const Window* a, const Window* b) { return a->start < b->start; });

    const auto floor_count = [n](double r) {
      return static_cast<std::size_t>(std::floor(r * static_cast<double>(n) + 1e-9));
    };
    const std::size_t n_train = std::min(n, floor_count(ratios.train));
    const std::size_t n_val = std::min(n - n_train, floor_count(ratios.val));

    for (std::size_t i = 0; i < n; ++i) {
      const bool first_of_val = (i == n_train && n_val > 0 && n_train > 0);
      const bool first_of_test = (i == n_train + n_val && i < n && i > 0);
      if (options.drop_boundary && (first_of_val || first_of_test)) continue;
      if (i < n_train) {
        split.train.push_back(*ordered[i]);
      } else if (i < n_train + n_val) {
        split.val.push_back(*ordered[i]);
      } else {
        split.test.push_back(*ordered[i]);
      }
    }
  }
  return split;
}

}  // namespace seismonet::signal
