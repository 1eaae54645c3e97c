#include <algorithm>
#include <cmath>

#include "seismonet/error.hpp"
#include "seismonet/signal.hpp"

namespace seismonet::signal {

std::vector<double> resample(std::span<const double> signal, double fs_in, double fs_out) {
  if (!(fs_in > 0.0) || !(fs_out > 0.0)) throw ValidationError("resample: rates must be positive");
  if (fs_in == fs_out) return {signal.begin(), signal.end()};
  const std::size_t n_in = signal.size();
  const auto n_out = static_cast<std::size_t>(std::llround(static_cast<double>(n_in) * fs_out / fs_in));
  std::vector<double> out(n_out);
  if (n_in == 0) return out;
  const double step = fs_in / fs_out;
  for (std::size_t j = 0; j < n_out; ++j) {
    const double pos = static_cast<double>(j) * step;
    const auto i0 = static_cast<std::size_t>(std::floor(pos));
    if (i0 + 1 >= n_in) {
      out[j] = signal[n_in - 1];
      continue;
    }
    const double frac = pos - static_cast<double>(i0);
    out[j] = signal[i0] + frac * (signal[i0 + 1] - signal[i0]);
  }
  return out;
}

std::vector<SampleIndex> rescale_annotations(std::span<const SampleIndex> peaks,
                                             double fs_in,
                                             double fs_out,
                                             std::size_t out_length) {
  std::vector<SampleIndex> out;
  out.reserve(peaks.size());
  if (out_length == 0) return out;
  for (SampleIndex p : peaks) {
    auto q = static_cast<SampleIndex>(std::llround(static_cast<double>(p) * fs_out / fs_in));
    q = std::min(q, out_length - 1);
    if (out.empty() || q > out.back()) out.push_back(q);
  }
  return out;
}

Record resample_record(const Record& record, double fs_out) {
  Record out;
  out.subject_id = record.subject_id;
  out.fs = fs_out;
  out.scg = resample(record.scg, record.fs, fs_out);
  if (record.ecg) out.ecg = resample(*record.ecg, record.fs, fs_out);
  if (record.rpeaks) out.rpeaks = rescale_annotations(*record.rpeaks, record.fs, fs_out, out.scg.size());
  return out;
}

}  // namespace seismonet::signal
