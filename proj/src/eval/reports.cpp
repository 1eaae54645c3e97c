#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "seismonet/eval.hpp"

namespace seismonet::eval {

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string ratio(const std::optional<double>& v) { return v ? fixed(*v, 2) : "NA"; }

std::string shortest(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

void write_row(const PeakMatchRow& r, std::ostream& out) {
  out << r.subject << ',' << r.detected << ',' << r.actual << ',' << r.counts.tp << ',' << r.counts.fp << ','
      << r.counts.fn << ',' << ratio(r.se()) << ',' << ratio(r.ppv()) << '\n';
}

}  // namespace

void write_match_report(const PeakMatchReport& report, std::ostream& out, bool include_total) {
  out << "subject,detected,actual,tp,fp,fn,se,ppv\n";
  for (const auto& r : report.rows) write_row(r, out);
  if (include_total) write_row(report.total(), out);
}

void write_match_report(const PeakMatchReport& report, const std::filesystem::path& path, bool include_total) {
  auto out = open_out(path);
  write_match_report(report, out, include_total);
}

void write_hrv_report(std::span<const HrvRow> rows, std::ostream& out) {
  out << "subject,source,mean_nn_ms,sdnn_ms,rmssd_ms,pnn50\n";
  for (const auto& r : rows) {
    out << r.subject << ',' << r.source << ',' << fixed(r.indices.mean_nn, 2) << ',' << fixed(r.indices.sdnn, 2)
        << ',' << fixed(r.indices.rmssd, 2) << ',' << fixed(r.indices.pnn50, 4) << '\n';
  }
}

void write_hrv_report(std::span<const HrvRow> rows, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_hrv_report(rows, out);
}

void write_bland_altman(const BlandAltmanStats& stats, std::ostream& out) {
  out << "index,mean,diff\n";
  for (std::size_t i = 0; i < stats.points.size(); ++i) {
    out << i << ',' << shortest(stats.points[i].mean) << ',' << shortest(stats.points[i].diff) << '\n';
  }
  out << "# mean_diff=" << shortest(stats.mean_diff) << " sd_diff=" << shortest(stats.sd_diff)
      << " loa_low=" << shortest(stats.loa_low) << " loa_high=" << shortest(stats.loa_high)
      << " loa_range=" << shortest(stats.loa_range) << " outliers=" << stats.outliers.size() << '\n';
}

void write_bland_altman(const BlandAltmanStats& stats, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_bland_altman(stats, out);
}

}  // namespace seismonet::eval
