#include <cmath>
#include <numbers>
#include <random>

#include "seismonet/error.hpp"
#include "seismonet/signal.hpp"

namespace seismonet::signal {

namespace {

// SCG morphology: an aortic-opening burst shortly after the R-peak and a
// weaker aortic-closing burst near the end of systole.
constexpr double kAoLatencyS = 0.040;
constexpr double kAoFreqHz = 15.0;
constexpr double kAoDecayS = 0.030;
constexpr double kAcLatencyS = 0.340;
constexpr double kAcFreqHz = 11.0;
constexpr double kAcDecayS = 0.035;
constexpr double kAcGain = 0.5;

// ECG morphology: a narrow R spike and a broad T wave.
constexpr double kRWidthS = 0.010;
constexpr double kTLatencyS = 0.250;
constexpr double kTWidthS = 0.040;
constexpr double kTGain = 0.2;

void add_burst(std::vector<double>& out, double fs, double onset_s, double amp, double freq, double decay) {
  const auto first = static_cast<std::ptrdiff_t>(std::ceil(onset_s * fs));
  const auto last = static_cast<std::ptrdiff_t>(std::floor((onset_s + 6.0 * decay) * fs));
  for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(first, 0);
       i <= last && i < static_cast<std::ptrdiff_t>(out.size()); ++i) {
    const double t = static_cast<double>(i) / fs - onset_s;
    out[static_cast<std::size_t>(i)] += amp * std::exp(-t / decay) * std::sin(2.0 * std::numbers::pi * freq * t);
  }
}

void add_gaussian(std::vector<double>& out, double fs, double center_s, double amp, double width_s) {
  const auto first = static_cast<std::ptrdiff_t>(std::ceil((center_s - 5.0 * width_s) * fs));
  const auto last = static_cast<std::ptrdiff_t>(std::floor((center_s + 5.0 * width_s) * fs));
  for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(first, 0);
       i <= last && i < static_cast<std::ptrdiff_t>(out.size()); ++i) {
    const double d = (static_cast<double>(i) / fs - center_s) / width_s;
    out[static_cast<std::size_t>(i)] += amp * std::exp(-0.5 * d * d);
  }
}

}  // namespace

void SynthParams::validate() const {
  if (!(fs > 0.0)) throw ValidationError("synth: fs must be positive");
  if (!(duration_s > 0.0)) throw ValidationError("synth: duration_s must be positive");
  if (!(mean_hr_bpm > 20.0 && mean_hr_bpm < 250.0)) throw ValidationError("synth: mean_hr_bpm must be in (20, 250)");
  if (!(hr_jitter >= 0.0 && hr_jitter < 1.0)) throw ValidationError("synth: hr_jitter must be in [0, 1)");
  if (!(scg_noise_sigma >= 0.0)) throw ValidationError("synth: scg_noise_sigma must be >= 0");
}

Record synth_record(const SynthParams& params, std::string subject_id) {
  params.validate();
  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const auto length = static_cast<std::size_t>(std::llround(params.duration_s * params.fs));
  const double rr_mean = 60.0 / params.mean_hr_bpm;

  Record rec;
  rec.subject_id = std::move(subject_id);
  rec.fs = params.fs;
  rec.scg.assign(length, 0.0);
  std::vector<double> ecg(length, 0.0);
  std::vector<SampleIndex> peaks;

  // First beat lands somewhere inside the first RR interval.
  double t = rr_mean * (0.3 + 0.25 * (unit(rng) + 1.0));
  while (true) {
    const auto idx = static_cast<SampleIndex>(std::llround(t * params.fs));
    if (idx >= length) break;
    const double t_peak = static_cast<double>(idx) / params.fs;
    if (peaks.empty() || idx > peaks.back()) peaks.push_back(idx);

    add_gaussian(ecg, params.fs, t_peak, 1.0, kRWidthS);
    add_gaussian(ecg, params.fs, t_peak + kTLatencyS, kTGain, kTWidthS);

    const double amp = 1.0 + 0.1 * gauss(rng);
    add_burst(rec.scg, params.fs, t_peak + kAoLatencyS, amp, kAoFreqHz, kAoDecayS);
    add_burst(rec.scg, params.fs, t_peak + kAcLatencyS, kAcGain * amp, kAcFreqHz, kAcDecayS);

    t += rr_mean * (1.0 + params.hr_jitter * unit(rng));
  }

  if (params.scg_noise_sigma > 0.0) {
    for (double& v : rec.scg) v += params.scg_noise_sigma * gauss(rng);
  }
  rec.ecg = std::move(ecg);
  rec.rpeaks = std::move(peaks);
  return rec;
}

}  // namespace seismonet::signal
