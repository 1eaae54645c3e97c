#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "seismonet/cli.hpp"
#include "seismonet/error.hpp"

namespace seismonet::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename U>
U parse_number(const std::string& key, const std::string& value, const char* what) {
  U out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError(key, std::string("expected ") + what + ", got '" + value + "'");
  }
  return out;
}

double real(const std::string& key, const std::string& value) {
  const double v = parse_number<double>(key, value, "a real number");
  if (!std::isfinite(v)) throw ConfigError(key, "must be finite");
  return v;
}

std::size_t count(const std::string& key, const std::string& value) {
  return parse_number<std::size_t>(key, value, "a non-negative integer");
}

bool boolean(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ConfigError(key, "expected true or false, got '" + value + "'");
}

nn::Reduction reduction(const std::string& key, const std::string& value) {
  if (value == "mean") return nn::Reduction::Mean;
  if (value == "sum") return nn::Reduction::Sum;
  if (value == "window_sum") return nn::Reduction::WindowSum;
  throw ConfigError(key, "expected mean, sum or window_sum, got '" + value + "'");
}

void require_positive(const char* key, double v) {
  if (!(v > 0.0)) throw ConfigError(key, "must be > 0");
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key.rfind("model.", 0) == 0) {
    model.set(key.substr(6), value);
    if (key == "model.input_len") input_len_set_ = true;
  } else if (key == "seed") {
    seed = parse_number<std::uint64_t>(key, value, "a non-negative integer");
  } else if (key == "paths.data_dir") {
    data_dir = value;
  } else if (key == "paths.output_dir") {
    output_dir = value;
  } else if (key == "paths.checkpoint") {
    checkpoint = value.empty() ? std::nullopt : std::optional<std::filesystem::path>(value);
  } else if (key == "data.fs") {
    data_fs = real(key, value);
  } else if (key == "sampling.target_fs") {
    target_fs = real(key, value);
  } else if (key == "data.window_sec") {
    window_sec = real(key, value);
  } else if (key == "data.hop_sec") {
    hop_sec = real(key, value);
  } else if (key == "data.dt_clip") {
    const double v = real(key, value);
    dt_clip = v > 0.0 ? std::optional<float>(static_cast<float>(v)) : std::nullopt;
  } else if (key == "split.train") {
    split.train = real(key, value);
  } else if (key == "split.val") {
    split.val = real(key, value);
  } else if (key == "split.test") {
    split.test = real(key, value);
  } else if (key == "split.drop_boundary") {
    drop_boundary = boolean(key, value);
  } else if (key == "train.epochs") {
    train.epochs = count(key, value);
  } else if (key == "train.lr0") {
    train.lr0 = real(key, value);
  } else if (key == "train.schedule_step") {
    train.schedule_step = count(key, value);
  } else if (key == "train.schedule_factor") {
    train.schedule_factor = real(key, value);
  } else if (key == "train.batch_size") {
    train.batch_size = count(key, value);
  } else if (key == "train.shuffle") {
    train.shuffle = boolean(key, value);
  } else if (key == "train.checkpoint_every") {
    train.checkpoint_every = count(key, value);
  } else if (key == "train.reduction") {
    train.reduction = reduction(key, value);
  } else if (key == "eval.tol_ms") {
    eval.tol_ms = real(key, value);
  } else if (key == "eval.min_prominence") {
    eval.valleys.min_prominence = real(key, value);
  } else if (key == "eval.refractory_ms") {
    eval.valleys.refractory_ms = real(key, value);
  } else if (key == "eval.smoothing") {
    const std::size_t w = count(key, value);
    eval.valleys.smoothing = w > 1 ? std::optional<std::size_t>(w) : std::nullopt;
  } else if (key == "eval.per_window") {
    eval.per_window = boolean(key, value);
  } else if (key == "eval.predictor") {
    if (value != "model" && value != "oracle") {
      throw ConfigError(key, "expected model or oracle, got '" + value + "'");
    }
    predictor = value;
  } else if (key == "synth.subjects") {
    synth_subjects = count(key, value);
  } else if (key == "synth.duration_s") {
    synth.duration_s = real(key, value);
  } else if (key == "synth.mean_hr_bpm") {
    synth.mean_hr_bpm = real(key, value);
  } else if (key == "synth.hr_step_bpm") {
    synth_hr_step_bpm = real(key, value);
  } else if (key == "synth.hr_jitter") {
    synth.hr_jitter = real(key, value);
  } else if (key == "synth.scg_noise_sigma") {
    synth.scg_noise_sigma = real(key, value);
  } else {
    throw ConfigError(key, "unknown key");
  }
}

std::size_t RunConfig::window_samples() const {
  return static_cast<std::size_t>(std::llround(window_sec * target_fs));
}

void RunConfig::finalize() {
  require_positive("data.fs", data_fs);
  require_positive("sampling.target_fs", target_fs);
  require_positive("data.window_sec", window_sec);
  require_positive("data.hop_sec", hop_sec);
  for (const auto& [key, n] : {std::pair{"data.window_sec", window_sec * target_fs},
                               std::pair{"data.hop_sec", hop_sec * target_fs}}) {
    if (std::abs(n - std::round(n)) > 1e-6) {
      throw ConfigError(key, "is not a whole number of samples at sampling.target_fs");
    }
  }
  if (!(split.train > 0.0 && split.val > 0.0 && split.test > 0.0) ||
      std::abs(split.train + split.val + split.test - 1.0) > 1e-9) {
    throw ConfigError("split", "ratios must be positive and sum to 1");
  }
  if (input_len_set_ && model.input_len != window_samples()) {
    throw ConfigError("model.input_len", "must equal data.window_sec * sampling.target_fs = " +
                                             std::to_string(window_samples()));
  }
  model.input_len = window_samples();
  model.validate();
  train.seed = seed;
  train.output_dir = output_dir;
  train.validate();
  eval.validate();
  if (synth_subjects == 0) throw ConfigError("synth.subjects", "must be >= 1");
  synth.fs = data_fs;
  try {
    synth.validate();
  } catch (const ValidationError& e) {
    throw ConfigError("synth", e.what());
  }
  const double max_hr = synth.mean_hr_bpm + synth_hr_step_bpm * static_cast<double>(synth_subjects - 1);
  if (!(max_hr > 20.0 && max_hr < 250.0)) {
    throw ConfigError("synth.hr_step_bpm", "pushes the last subject's heart rate outside (20, 250) bpm");
  }
}

std::filesystem::path RunConfig::checkpoint_path() const {
  return checkpoint ? *checkpoint : output_dir / "model.smn";
}

RunConfig load_run_config(const std::optional<std::filesystem::path>& path, const std::vector<std::string>& overrides,
                          std::optional<std::uint64_t> seed) {
  RunConfig config;
  if (path) {
    std::ifstream in(*path);
    if (!in) throw ValidationError("cannot open config " + path->string());
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
      ++number;
      const std::string body = trim(line.substr(0, line.find('#')));
      if (body.empty()) continue;
      const auto eq = body.find('=');
      if (eq == std::string::npos) {
        throw FormatError(path->string() + ": expected key = value", number);
      }
      config.set(trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
    }
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError(o, "override must be key=value");
    config.set(trim(o.substr(0, eq)), trim(o.substr(eq + 1)));
  }
  if (seed) config.seed = *seed;
  config.finalize();
  return config;
}

}  // namespace seismonet::cli
