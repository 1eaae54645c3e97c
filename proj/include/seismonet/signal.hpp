#pragma once

// Physiological records, windowing, dataset splits and distance-transform
// targets. All functions here are pure and safe to call concurrently.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace seismonet::signal {

using SampleIndex = std::size_t;

/// One subject's synchronized SCG/ECG streams.
struct Record {
  std::string subject_id;
  double fs = 0.0;
  std::vector<double> scg;
  std::optional<std::vector<double>> ecg;
  std::optional<std::vector<SampleIndex>> rpeaks;

  std::size_t length() const { return scg.size(); }

  /// Throws ValidationError if any invariant is broken.
  void validate() const;
};

struct Window {
  std::string subject_id;
  SampleIndex start = 0;
  std::vector<float> scg_seg;
  std::optional<std::vector<float>> target_dt;
  std::optional<std::vector<SampleIndex>> rpeaks_local;

  bool labeled() const { return target_dt.has_value(); }
};

struct DatasetSplit {
  std::vector<Window> train;
  std::vector<Window> val;
  std::vector<Window> test;
};

struct SplitRatios {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
};

struct SplitOptions {
  /// Drop the first window of val and of test; each overlaps the last window
  /// of the preceding section when hop < window length.
  bool drop_boundary = true;
};

struct SynthParams {
  double fs = 100.0;
  double duration_s = 60.0;
  double mean_hr_bpm = 70.0;
  double hr_jitter = 0.05;
  double scg_noise_sigma = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct WindowOptions {
  double w_sec = 10.0;
  double hop_sec = 5.0;
  /// Optional cap applied to distance-transform targets (samples).
  std::optional<float> dt_clip;
};

// --- I/O --------------------------------------------------------------------

/// Sibling annotation path for a record file: `<stem>.rpeaks`.
std::filesystem::path annotation_path(const std::filesystem::path& record_path);

/// Reads a `t,scg[,ecg]` CSV plus its optional `.rpeaks` sibling.
Record load_record(const std::filesystem::path& path, double fs);

/// Writes the record CSV and, if annotated, the `.rpeaks` sibling.
void save_record(const Record& record, const std::filesystem::path& path);

std::vector<SampleIndex> load_annotations(const std::filesystem::path& path);
void save_annotations(std::span<const SampleIndex> peaks, const std::filesystem::path& path);

// --- transforms ---------------------------------------------------------------

/// Distance (in samples) from each index to the nearest annotation.
/// Two-pass O(length) sweep; throws ValidationError on empty annotations.
std::vector<std::size_t> distance_transform(std::span<const SampleIndex> annotations,
                                            std::size_t length);

/// Linear-interpolation resampling; output length round(L * fs_out / fs_in).
std::vector<double> resample(std::span<const double> signal, double fs_in, double fs_out);

/// Rescales annotation indices by fs_out/fs_in, rounding and de-duplicating.
std::vector<SampleIndex> rescale_annotations(std::span<const SampleIndex> peaks,
                                             double fs_in,
                                             double fs_out,
                                             std::size_t out_length);

/// Resamples every stream of a record and its annotations.
Record resample_record(const Record& record, double fs_out);

// --- windowing and splits --------------------------------------------------------

/// Windows at starts 0, hop, 2*hop, ... with local annotations and
/// distance-transform targets when the record is annotated. Windows that hold
/// no annotation carry no target.
std::vector<Window> segment_windows(const Record& record, const WindowOptions& options);

/// Overload taking window and hop lengths in seconds.
std::vector<Window> segment_windows(const Record& record, double w_sec, double hop_sec);

/// Per-subject contiguous split in temporal order. Keys are subject ids.
DatasetSplit split_dataset(const std::map<std::string, std::vector<Window>>& windows,
                           const SplitRatios& ratios,
                           const SplitOptions& options = {});

// --- synthesis and annotation ------------------------------------------------------

/// Deterministic synthetic SCG/ECG record with ground-truth R-peaks.
Record synth_record(const SynthParams& params, std::string subject_id = "synth");

/// R-peak annotator for ECG: differentiate, square, integrate over 150 ms,
/// adaptive threshold, 200 ms refractory period, then snap to the ECG maximum.
std::vector<SampleIndex> annotate_ecg_rpeaks(std::span<const double> ecg, double fs);

}  // namespace seismonet::signal
