#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "seismonet/error.hpp"
#include "seismonet/eval.hpp"

namespace seismonet::eval {

namespace {

struct Detection {
  SampleIndex index;
  float depth;
};

/// Deepest first; drops detections closer than `gap` samples to a kept one.
std::vector<SampleIndex> merge_detections(std::vector<Detection> dets, double gap) {
  std::stable_sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) {
    return a.depth < b.depth || (a.depth == b.depth && a.index < b.index);
  });
  std::set<SampleIndex> kept;
  for (const auto& d : dets) {
    const auto next = kept.lower_bound(d.index);
    if (next != kept.end() && static_cast<double>(*next - d.index) < gap) continue;
    if (next != kept.begin() && static_cast<double>(d.index - *std::prev(next)) < gap) continue;
    kept.insert(d.index);
  }
  return {kept.begin(), kept.end()};
}

/// Twice the window center, kept integral.
std::size_t center2(const signal::Window& w) { return 2 * w.start + w.scg_seg.size() - 1; }

std::vector<SampleIndex> merge_owned(std::span<const signal::Window> windows,
                                     std::span<const std::vector<float>> predictions,
                                     const std::vector<std::vector<SampleIndex>>& valleys,
                                     double gap) {
  std::vector<std::size_t> order(windows.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return windows[a].start < windows[b].start; });
  std::vector<Detection> dets;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& w = windows[order[k]];
    for (SampleIndex v : valleys[order[k]]) {
      const std::size_t p4 = 4 * (w.start + v);
      const bool earlier = k > 0 && p4 <= center2(windows[order[k - 1]]) + center2(w);
      const bool later = k + 1 < order.size() && p4 > center2(w) + center2(windows[order[k + 1]]);
      if (!earlier && !later) dets.push_back({w.start + v, predictions[order[k]][v]});
    }
  }
  return merge_detections(std::move(dets), gap);
}

std::optional<HrvIndices> try_hrv(const std::vector<SampleIndex>& peaks, double fs) {
  if (peaks.size() < 3) return std::nullopt;
  return hrv_indices(nn_intervals(peaks, fs));
}

}  // namespace

void EvalOptions::validate() const {
  valleys.validate();
  if (!(tol_ms > 0.0) || !std::isfinite(tol_ms)) throw ConfigError("eval.tol_ms", "must be a finite number > 0");
}

Predictor model_predictor(const model::SeismoNet<float>& model) {
  return [&model](const signal::Window& w) {
    nn::Tensor<float> x(nn::Shape{1, 1, w.scg_seg.size()}, w.scg_seg);
    return model.predict(x).values();
  };
}

Predictor oracle_predictor() {
  return [](const signal::Window& w) {
    if (w.target_dt) return *w.target_dt;
    // No reference peak in the window: a flat output has no valleys.
    return std::vector<float>(w.scg_seg.size(), static_cast<float>(w.scg_seg.size()));
  };
}

std::vector<SampleIndex> detect_record_peaks(std::span<const signal::Window> windows,
                                             std::span<const std::vector<float>> predictions,
                                             double fs,
                                             const ValleyParams& params) {
  if (windows.size() != predictions.size()) {
    throw ValidationError("detect_record_peaks: one prediction per window required");
  }
  std::vector<std::vector<SampleIndex>> valleys;
  valleys.reserve(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    if (predictions[i].size() != windows[i].scg_seg.size()) {
      throw ValidationError("detect_record_peaks: prediction length differs from window length");
    }
    valleys.push_back(detect_valleys(predictions[i], fs, params));
  }
  return merge_owned(windows, predictions, valleys, params.refractory_ms * fs / 2000.0);
}

SubjectEvaluation evaluate_subject(const Predictor& predict, const std::vector<signal::Window>& windows, double fs,
                                   const EvalOptions& options) {
  options.validate();
  if (!(fs > 0.0)) throw ValidationError("evaluate_subject: fs must be positive");
  if (windows.empty()) throw InsufficientDataError("evaluate_subject: no windows");
  const std::string& subject = windows.front().subject_id;

  SubjectEvaluation result;
  result.row.subject = subject;
  std::vector<std::vector<float>> predictions;
  std::vector<std::vector<SampleIndex>> valleys;
  std::set<SampleIndex> all_actual;
  std::set<SampleIndex> scorable_actual;

  for (const auto& w : windows) {
    if (w.subject_id != subject) {
      throw ValidationError("evaluate_subject: windows of " + subject + " and " + w.subject_id + " mixed");
    }
    if (!w.labeled() || !w.rpeaks_local) {
      throw ValidationError("evaluate_subject: window of " + subject + " at " + std::to_string(w.start) +
                            " is not labeled");
    }
    const std::size_t len = w.scg_seg.size();
    predictions.push_back(predict(w));
    if (predictions.back().size() != len) {
      throw ValidationError("evaluate_subject: prediction has " + std::to_string(predictions.back().size()) +
                            " samples for a window of " + std::to_string(len));
    }
    valleys.push_back(detect_valleys(predictions.back(), fs, options.valleys));

    // A valley needs a neighbor on both sides, so edge peaks are not scored.
    std::vector<SampleIndex> scorable;
    for (SampleIndex p : *w.rpeaks_local) {
      all_actual.insert(w.start + p);
      if (p > 0 && p + 1 < len) {
        scorable.push_back(p);
        scorable_actual.insert(w.start + p);
      }
    }
    if (options.per_window) {
      result.row.detected += valleys.back().size();
      result.row.actual += scorable.size();
      result.row.counts += match_peaks(valleys.back(), scorable, options.tol_ms, fs);
    }
  }

  result.detected_peaks = merge_owned(windows, predictions, valleys, options.valleys.refractory_ms * fs / 2000.0);
  result.actual_peaks.assign(all_actual.begin(), all_actual.end());
  if (!options.per_window) {
    const std::vector<SampleIndex> actual(scorable_actual.begin(), scorable_actual.end());
    result.row.detected = result.detected_peaks.size();
    result.row.actual = actual.size();
    result.row.counts = match_peaks(result.detected_peaks, actual, options.tol_ms, fs);
  }
  result.scg_hrv = try_hrv(result.detected_peaks, fs);
  result.ecg_hrv = try_hrv(result.actual_peaks, fs);
  return result;
}

}  // namespace seismonet::eval
