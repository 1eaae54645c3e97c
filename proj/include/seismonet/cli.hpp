#pragma once

// Run configuration and subcommand implementations behind the `seismonet`
// executable.
//
// Config files hold one `section.key = value` per line; `#` starts a comment.
// Later settings win, so `--set` overrides apply after the file.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "seismonet/eval.hpp"
#include "seismonet/model.hpp"
#include "seismonet/signal.hpp"
#include "seismonet/train.hpp"

namespace seismonet::cli {

struct RunConfig {
  std::uint64_t seed = 0;

  std::filesystem::path data_dir = "data";
  std::filesystem::path output_dir = "out";
  std::optional<std::filesystem::path> checkpoint;  // default: <output_dir>/model.smn

  double data_fs = 250.0;    // sampling rate of record files; synth writes at this rate
  double target_fs = 250.0;  // records are resampled to this rate before windowing
  double window_sec = 10.0;
  double hop_sec = 5.0;
  std::optional<float> dt_clip;

  signal::SplitRatios split;
  bool drop_boundary = true;

  model::ModelConfig model;
  train::TrainConfig train;
  eval::EvalOptions eval;
  std::string predictor = "model";  // "model" or "oracle"

  std::size_t synth_subjects = 6;
  signal::SynthParams synth;
  double synth_hr_step_bpm = 0.0;  // subject i gets mean_hr_bpm + i * step

  /// Applies one dotted key; throws ConfigError naming the key.
  void set(const std::string& key, const std::string& value);
  /// Derives model.input_len from the window length and validates every section.
  void finalize();

  std::filesystem::path checkpoint_path() const;
  std::size_t window_samples() const;

 private:
  bool input_len_set_ = false;
};

/// Reads `path` (if any), applies overrides (`key=value`) and an optional
/// seed, then finalizes.
RunConfig load_run_config(const std::optional<std::filesystem::path>& path,
                          const std::vector<std::string>& overrides,
                          std::optional<std::uint64_t> seed = std::nullopt);

/// Records in `data_dir` (`*.csv`, sorted by name), resampled to target_fs.
/// Records without a `.rpeaks` file but with an ECG column are annotated.
std::vector<signal::Record> load_dataset(const RunConfig& config);

/// Windows of every record, split per subject. Windows without an annotation
/// are dropped.
signal::DatasetSplit build_split(const RunConfig& config, const std::vector<signal::Record>& records);

// Subcommands. Each returns normally on success and throws on failure;
// progress and summaries go to `log`.
void cmd_synth(const RunConfig& config, std::ostream& log);
void cmd_train(const RunConfig& config, std::ostream& log);
void cmd_eval(const RunConfig& config, std::ostream& log);
void cmd_infer(const RunConfig& config, const std::filesystem::path& record_path, std::ostream& log);
/// HRV indices of an annotation file at data_fs, written to <output_dir>/<stem>.hrv.csv.
void cmd_hrv(const RunConfig& config, const std::filesystem::path& peaks_path, std::ostream& log);
/// Bland-Altman agreement between the scg and ecg rows of an HRV report.
void cmd_agree(const RunConfig& config, const std::filesystem::path& hrv_csv, std::ostream& log);

/// Process exit code for an exception escaping a subcommand: 1 for
/// validation errors, 2 otherwise.
int exit_code_for(const std::exception& e);

}  // namespace seismonet::cli
