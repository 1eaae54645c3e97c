#pragma once

// R-peak detection from predicted distance-transform waveforms, scoring
// against reference annotations and heart-rate-variability statistics.

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seismonet/model.hpp"
#include "seismonet/signal.hpp"

namespace seismonet::eval {

using signal::SampleIndex;

// --- valleys ------------------------------------------------------------------------

struct ValleyParams {
  double min_prominence = 0.0;  // in output units (samples of distance)
  double refractory_ms = 200.0;
  std::optional<std::size_t> smoothing;  // moving-average width in samples

  /// Throws ConfigError with an `eval.*` key.
  void validate() const;
};

/// Strict local minima with prominence >= min_prominence, thinned deepest
/// first so no two kept indices are closer than refractory_ms * fs / 1000.
/// Returns sorted indices; inputs shorter than 3 samples yield none.
std::vector<SampleIndex> detect_valleys(std::span<const float> signal, double fs, const ValleyParams& params);

// --- matching -----------------------------------------------------------------------

struct MatchCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  MatchCounts& operator+=(const MatchCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
};

/// One-to-one matching in order of increasing distance; pairs farther apart
/// than tol_ms * fs / 1000 are rejected. Both inputs must be sorted.
MatchCounts match_peaks(std::span<const SampleIndex> detected, std::span<const SampleIndex> actual, double tol_ms,
                        double fs);

/// TP / (TP + FN); empty when the denominator is zero.
std::optional<double> sensitivity(std::size_t tp, std::size_t fn);
/// TP / (TP + FP); empty when the denominator is zero.
std::optional<double> ppv(std::size_t tp, std::size_t fp);

struct PeakMatchRow {
  std::string subject;
  std::size_t detected = 0;
  std::size_t actual = 0;
  MatchCounts counts;

  std::optional<double> se() const { return sensitivity(counts.tp, counts.fn); }
  std::optional<double> ppv() const { return eval::ppv(counts.tp, counts.fp); }
};

struct PeakMatchReport {
  std::vector<PeakMatchRow> rows;

  /// Sum over rows, labelled "total".
  PeakMatchRow total() const;
};

// --- HRV ----------------------------------------------------------------------------

/// Successive differences in ms. Throws InsufficientDataError below 2 peaks
/// and ValidationError on unsorted or repeated peaks.
std::vector<double> nn_intervals(std::span<const SampleIndex> peaks, double fs);

struct HrvIndices {
  double mean_nn = 0.0;  // ms
  double sdnn = 0.0;     // ms, divisor n - 1
  double rmssd = 0.0;    // ms
  double pnn50 = 0.0;    // fraction of successive differences above 50 ms
};

/// Throws InsufficientDataError below 2 intervals.
HrvIndices hrv_indices(std::span<const double> nn);

/// Indices over several interval sequences at once; successive differences
/// are taken within each sequence only.
HrvIndices hrv_indices_pooled(std::span<const std::vector<double>> sequences);

struct BlandAltmanStats {
  struct Point {
    double mean = 0.0;
    double diff = 0.0;
  };

  double mean_diff = 0.0;
  double sd_diff = 0.0;
  double loa_low = 0.0;
  double loa_high = 0.0;
  double loa_range = 0.0;
  std::vector<Point> points;
  std::vector<std::size_t> outliers;
};

/// diff = a - b per pair, limits at mean_diff -/+ 1.96 sd_diff.
/// Throws InsufficientDataError below 2 pairs.
BlandAltmanStats bland_altman(std::span<const std::pair<double, double>> pairs);

// --- subject evaluation -------------------------------------------------------------

/// Maps a window to a predicted transform of the same length.
using Predictor = std::function<std::vector<float>(const signal::Window&)>;

/// Inference-mode model output.
Predictor model_predictor(const model::SeismoNet<float>& model);
/// The window's own target; for checking the detection and scoring path.
Predictor oracle_predictor();

/// Valleys of each window's prediction mapped to record coordinates. A
/// window contributes only positions closer to its own center than to any
/// other window's; survivors closer than half the refractory period are
/// merged, keeping the deeper. Windows need not be sorted.
std::vector<SampleIndex> detect_record_peaks(std::span<const signal::Window> windows,
                                             std::span<const std::vector<float>> predictions,
                                             double fs,
                                             const ValleyParams& params);

struct EvalOptions {
  ValleyParams valleys;
  double tol_ms = 90.0;
  /// Score every window on its own and sum the counts instead of merging
  /// overlapping windows in record coordinates.
  bool per_window = false;

  void validate() const;
};

struct SubjectEvaluation {
  PeakMatchRow row;
  std::vector<SampleIndex> detected_peaks;  // record coordinates, deduplicated
  std::vector<SampleIndex> actual_peaks;    // record coordinates
  std::optional<HrvIndices> scg_hrv;        // empty below 3 peaks
  std::optional<HrvIndices> ecg_hrv;
};

/// Windows must be labeled and belong to one subject. Reference peaks on the
/// first or last sample of every window that contains them are not scored.
SubjectEvaluation evaluate_subject(const Predictor& predict,
                                   const std::vector<signal::Window>& windows,
                                   double fs,
                                   const EvalOptions& options = {});

// --- reports ------------------------------------------------------------------------

/// `subject,detected,actual,tp,fp,fn,se,ppv`, ratios to 2 decimals, NA when undefined.
void write_match_report(const PeakMatchReport& report, std::ostream& out, bool include_total = true);
void write_match_report(const PeakMatchReport& report, const std::filesystem::path& path, bool include_total = true);

struct HrvRow {
  std::string subject;
  std::string source;  // "scg" or "ecg"
  HrvIndices indices;
};

/// `subject,source,mean_nn_ms,sdnn_ms,rmssd_ms,pnn50`.
void write_hrv_report(std::span<const HrvRow> rows, std::ostream& out);
void write_hrv_report(std::span<const HrvRow> rows, const std::filesystem::path& path);

/// `index,mean,diff` rows followed by one `# mean_diff=...` summary line.
void write_bland_altman(const BlandAltmanStats& stats, std::ostream& out);
void write_bland_altman(const BlandAltmanStats& stats, const std::filesystem::path& path);

}  // namespace seismonet::eval
