#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "seismonet/cli.hpp"
#include "seismonet/error.hpp"

namespace seismonet::cli {

namespace {

namespace fs = std::filesystem;

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string ratio(const std::optional<double>& v) { return v ? fixed(*v, 2) : "NA"; }

std::string subject_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "subj%02zu", i + 1);
  return buf;
}

std::map<std::string, std::vector<signal::Window>> by_subject(const std::vector<signal::Window>& windows) {
  std::map<std::string, std::vector<signal::Window>> out;
  for (const auto& w : windows) out[w.subject_id].push_back(w);
  return out;
}

model::SeismoNet<float> load_model(const RunConfig& config) {
  const auto path = config.checkpoint_path();
  if (!fs::exists(path)) throw ValidationError("checkpoint " + path.string() + " does not exist");
  auto loaded = model::load_checkpoint(path);
  if (loaded.model.config().input_len != config.window_samples()) {
    throw ConfigError("data.window_sec", "checkpoint expects windows of " +
                                             std::to_string(loaded.model.config().input_len) + " samples, config gives " +
                                             std::to_string(config.window_samples()));
  }
  loaded.model.set_training(false);
  return std::move(loaded.model);
}

using IndexGetter = double (*)(const eval::HrvIndices&);

const std::vector<std::pair<std::string, IndexGetter>>& hrv_fields() {
  static const std::vector<std::pair<std::string, IndexGetter>> fields{
      {"mean_nn", [](const eval::HrvIndices& h) { return h.mean_nn; }},
      {"sdnn", [](const eval::HrvIndices& h) { return h.sdnn; }},
      {"rmssd", [](const eval::HrvIndices& h) { return h.rmssd; }},
      {"pnn50", [](const eval::HrvIndices& h) { return h.pnn50; }},
  };
  return fields;
}

/// Bland-Altman per HRV index over subjects carrying both sources; empty below 2 subjects.
std::vector<std::pair<std::string, eval::BlandAltmanStats>> agreement(
    const std::vector<std::pair<eval::HrvIndices, eval::HrvIndices>>& scg_ecg) {
  std::vector<std::pair<std::string, eval::BlandAltmanStats>> out;
  if (scg_ecg.size() < 2) return out;
  for (const auto& [name, get] : hrv_fields()) {
    std::vector<std::pair<double, double>> pairs;
    for (const auto& [scg, ecg] : scg_ecg) pairs.emplace_back(get(scg), get(ecg));
    out.emplace_back(name, eval::bland_altman(pairs));
  }
  return out;
}

void log_agreement(const std::vector<std::pair<std::string, eval::BlandAltmanStats>>& stats, std::ostream& log) {
  for (const auto& [name, s] : stats) {
    log << "  " << name << ": mean_diff " << fixed(s.mean_diff, 4) << ", limits [" << fixed(s.loa_low, 4) << ", "
        << fixed(s.loa_high, 4) << "], outliers " << s.outliers.size() << '\n';
  }
}

}  // namespace

std::vector<signal::Record> load_dataset(const RunConfig& config) {
  if (!fs::is_directory(config.data_dir)) {
    throw ConfigError("paths.data_dir", config.data_dir.string() + " is not a directory");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(config.data_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ValidationError("no record files (*.csv) in " + config.data_dir.string());

  std::vector<signal::Record> records;
  for (const auto& f : files) {
    auto rec = signal::load_record(f, config.data_fs);
    if (!rec.rpeaks && rec.ecg) rec.rpeaks = signal::annotate_ecg_rpeaks(*rec.ecg, rec.fs);
    if (config.target_fs != config.data_fs) rec = signal::resample_record(rec, config.target_fs);
    records.push_back(std::move(rec));
  }
  return records;
}

signal::DatasetSplit build_split(const RunConfig& config, const std::vector<signal::Record>& records) {
  std::map<std::string, std::vector<signal::Window>> windows;
  for (const auto& rec : records) {
    if (!rec.rpeaks) {
      throw ValidationError("record " + rec.subject_id + " has neither annotations nor an ECG column");
    }
    auto all = signal::segment_windows(rec, signal::WindowOptions{config.window_sec, config.hop_sec, config.dt_clip});
    std::erase_if(all, [](const signal::Window& w) { return !w.labeled(); });
    auto [it, inserted] = windows.emplace(rec.subject_id, std::move(all));
    if (!inserted) throw ValidationError("duplicate subject " + rec.subject_id);
  }
  return signal::split_dataset(windows, config.split, signal::SplitOptions{config.drop_boundary});
}

void cmd_synth(const RunConfig& config, std::ostream& log) {
  std::vector<signal::Record> records;
  for (std::size_t i = 0; i < config.synth_subjects; ++i) {
    signal::SynthParams params = config.synth;
    params.seed = model::derive_seed(config.seed, i);
    params.mean_hr_bpm += config.synth_hr_step_bpm * static_cast<double>(i);
    records.push_back(signal::synth_record(params, subject_name(i)));
  }
  fs::create_directories(config.data_dir);
  for (const auto& rec : records) {
    const auto path = config.data_dir / (rec.subject_id + ".csv");
    signal::save_record(rec, path);
    log << "wrote " << path.string() << " (" << rec.length() << " samples, " << rec.rpeaks->size() << " beats)\n";
  }
}

void cmd_train(const RunConfig& config, std::ostream& log) {
  const auto split = build_split(config, load_dataset(config));
  if (split.train.empty()) throw InsufficientDataError("training split is empty");
  log << "windows: train " << split.train.size() << ", val " << split.val.size() << ", test " << split.test.size()
      << '\n';
  model::SeismoNet<float> net(config.model, config.seed);
  log << "model: " << net.block_count() << " blocks, " << net.params().trainable_count() << " parameters\n";
  const auto history = train::train(net, split.train, split.val, config.train, [&](const train::EpochRecord& r) {
    log << "epoch " << r.epoch << " lr " << r.lr << " train " << fixed(r.train_loss, 5);
    if (r.val_loss) log << " val " << fixed(*r.val_loss, 5);
    log << '\n';
  });
  if (config.checkpoint && *config.checkpoint != config.output_dir / "model.smn") {
    if (config.checkpoint->has_parent_path()) fs::create_directories(config.checkpoint->parent_path());
    model::save_checkpoint(net, *config.checkpoint, config.train.epochs);
  }
  log << "checkpoint " << config.checkpoint_path().string() << '\n';
  if (history.best_epoch) log << "best validation epoch " << *history.best_epoch << '\n';
}

void cmd_eval(const RunConfig& config, std::ostream& log) {
  std::optional<model::SeismoNet<float>> net;
  if (config.predictor == "model") net.emplace(load_model(config));
  const auto predict = net ? eval::model_predictor(*net) : eval::oracle_predictor();

  const auto split = build_split(config, load_dataset(config));
  if (split.test.empty()) throw InsufficientDataError("test split is empty");

  eval::PeakMatchReport report;
  std::vector<eval::HrvRow> hrv_rows;
  std::vector<std::pair<eval::HrvIndices, eval::HrvIndices>> paired;
  std::vector<std::vector<double>> scg_nn, ecg_nn;
  for (const auto& [subject, windows] : by_subject(split.test)) {
    const auto result = eval::evaluate_subject(predict, windows, config.target_fs, config.eval);
    report.rows.push_back(result.row);
    if (result.scg_hrv) {
      hrv_rows.push_back({subject, "scg", *result.scg_hrv});
      scg_nn.push_back(eval::nn_intervals(result.detected_peaks, config.target_fs));
    }
    if (result.ecg_hrv) {
      hrv_rows.push_back({subject, "ecg", *result.ecg_hrv});
      ecg_nn.push_back(eval::nn_intervals(result.actual_peaks, config.target_fs));
    }
    if (result.scg_hrv && result.ecg_hrv) paired.emplace_back(*result.scg_hrv, *result.ecg_hrv);
  }
  if (scg_nn.size() > 1) hrv_rows.push_back({"pooled", "scg", eval::hrv_indices_pooled(scg_nn)});
  if (ecg_nn.size() > 1) hrv_rows.push_back({"pooled", "ecg", eval::hrv_indices_pooled(ecg_nn)});
  const auto stats = agreement(paired);

  fs::create_directories(config.output_dir);
  eval::write_match_report(report, config.output_dir / "report.csv");
  eval::write_hrv_report(hrv_rows, config.output_dir / "hrv.csv");
  for (const auto& [name, s] : stats) eval::write_bland_altman(s, config.output_dir / ("agreement_" + name + ".csv"));

  const auto total = report.total();
  log << "subjects " << report.rows.size() << ", detected " << total.detected << ", actual " << total.actual
      << ", TP " << total.counts.tp << ", FP " << total.counts.fp << ", FN " << total.counts.fn << '\n';
  log << "Se " << ratio(total.se()) << " PPV " << ratio(total.ppv()) << '\n';
  if (stats.empty()) {
    log << "agreement skipped: fewer than 2 subjects with HRV on both sources\n";
  } else {
    log << "agreement (scg - ecg):\n";
    log_agreement(stats, log);
  }
  log << "reports in " << config.output_dir.string() << '\n';
}

void cmd_infer(const RunConfig& config, const fs::path& record_path, std::ostream& log) {
  const auto net = load_model(config);
  const auto original = signal::load_record(record_path, config.data_fs);
  const auto record =
      config.target_fs != config.data_fs ? signal::resample_record(original, config.target_fs) : original;
  const auto windows = signal::segment_windows(record, config.window_sec, config.hop_sec);

  std::vector<std::vector<float>> predictions;
  const auto predict = eval::model_predictor(net);
  for (const auto& w : windows) predictions.push_back(predict(w));
  auto peaks = eval::detect_record_peaks(windows, predictions, config.target_fs, config.eval.valleys);
  if (config.target_fs != config.data_fs) {
    peaks = signal::rescale_annotations(peaks, config.target_fs, config.data_fs, original.length());
  }

  fs::create_directories(config.output_dir);
  const std::string stem = record_path.stem().string();
  const auto pred_path = config.output_dir / (stem + ".pred.csv");
  std::ofstream out(pred_path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + pred_path.string() + " for writing");
  out << "window,start,sample,t_pred\n";
  for (std::size_t k = 0; k < windows.size(); ++k) {
    for (std::size_t i = 0; i < predictions[k].size(); ++i) {
      char buf[32];
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), predictions[k][i]);
      out << k << ',' << windows[k].start << ',' << i << ',' << std::string_view(buf, ptr - buf) << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failed: " + pred_path.string());
  const auto peaks_path = config.output_dir / (stem + ".peaks");
  signal::save_annotations(peaks, peaks_path);
  log << windows.size() << " windows, " << peaks.size() << " peaks\n"
      << "wrote " << pred_path.string() << " and " << peaks_path.string() << '\n';
}

void cmd_hrv(const RunConfig& config, const fs::path& peaks_path, std::ostream& log) {
  const auto peaks = signal::load_annotations(peaks_path);
  const auto h = eval::hrv_indices(eval::nn_intervals(peaks, config.data_fs));
  const std::vector<eval::HrvRow> rows{{peaks_path.stem().string(), "file", h}};
  fs::create_directories(config.output_dir);
  const auto path = config.output_dir / (peaks_path.stem().string() + ".hrv.csv");
  eval::write_hrv_report(rows, path);
  eval::write_hrv_report(rows, log);
  log << "wrote " << path.string() << '\n';
}

void cmd_agree(const RunConfig& config, const fs::path& hrv_csv, std::ostream& log) {
  std::ifstream in(hrv_csv);
  if (!in) throw ValidationError("cannot open " + hrv_csv.string());
  std::string line;
  if (!std::getline(in, line) || line != "subject,source,mean_nn_ms,sdnn_ms,rmssd_ms,pnn50") {
    throw FormatError(hrv_csv.string() + ": expected header subject,source,mean_nn_ms,sdnn_ms,rmssd_ms,pnn50", 1);
  }
  std::map<std::string, std::map<std::string, eval::HrvIndices>> table;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 6) throw FormatError(hrv_csv.string() + ": expected 6 columns", number);
    double v[4];
    for (int i = 0; i < 4; ++i) {
      const auto& c = cells[2 + i];
      auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v[i]);
      if (ec != std::errc{} || ptr != c.data() + c.size()) {
        throw FormatError(hrv_csv.string() + ": bad number '" + c + "'", number);
      }
    }
    table[cells[0]][cells[1]] = eval::HrvIndices{v[0], v[1], v[2], v[3]};
  }
  std::vector<std::pair<eval::HrvIndices, eval::HrvIndices>> paired;
  for (const auto& [subject, sources] : table) {
    if (subject == "pooled") continue;
    const auto scg = sources.find("scg");
    const auto ecg = sources.find("ecg");
    if (scg != sources.end() && ecg != sources.end()) paired.emplace_back(scg->second, ecg->second);
  }
  if (paired.size() < 2) throw InsufficientDataError("agreement needs at least 2 subjects with scg and ecg rows");
  const auto stats = agreement(paired);
  fs::create_directories(config.output_dir);
  for (const auto& [name, s] : stats) eval::write_bland_altman(s, config.output_dir / ("agreement_" + name + ".csv"));
  log << paired.size() << " subjects, agreement (scg - ecg):\n";
  log_agreement(stats, log);
}

int exit_code_for(const std::exception& e) { return dynamic_cast<const ValidationError*>(&e) ? 1 : 2; }

}  // namespace seismonet::cli
