#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>
#include <system_error>

#include "seismonet/error.hpp"
#include "seismonet/signal.hpp"

namespace seismonet::signal {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    fields.push_back(trim(line.substr(pos, comma == std::string_view::npos ? line.npos : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return fields;
}

double parse_double(std::string_view field, std::size_t line_no) {
  double value = 0.0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc{} || ptr != end || field.empty() || !std::isfinite(value)) {
    throw FormatError("invalid number '" + std::string(field) + "'", line_no);
  }
  return value;
}

void append_double(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

}  // namespace

void Record::validate() const {
  if (!(fs > 0.0) || !std::isfinite(fs)) throw ValidationError("record " + subject_id + ": fs must be positive");
  if (ecg && ecg->size() != scg.size()) {
    throw ValidationError("record " + subject_id + ": ecg length " + std::to_string(ecg->size()) +
                          " != scg length " + std::to_string(scg.size()));
  }
  if (rpeaks) {
    for (std::size_t i = 0; i < rpeaks->size(); ++i) {
      const SampleIndex p = (*rpeaks)[i];
      if (p >= scg.size()) {
        throw ValidationError("record " + subject_id + ": annotation " + std::to_string(p) + " out of range");
      }
      if (i > 0 && p <= (*rpeaks)[i - 1]) {
        throw ValidationError("record " + subject_id + ": annotations not strictly increasing at entry " +
                              std::to_string(i));
      }
    }
  }
}

std::filesystem::path annotation_path(const std::filesystem::path& record_path) {
  std::filesystem::path p = record_path;
  p.replace_extension(".rpeaks");
  return p;
}

std::vector<SampleIndex> load_annotations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open annotation file " + path.string());
  std::vector<SampleIndex> peaks;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view field = trim(line);
    if (field.empty()) continue;
    SampleIndex value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
      throw FormatError(path.string() + ": invalid sample index '" + std::string(field) + "'", line_no);
    }
    if (!peaks.empty() && value <= peaks.back()) {
      throw ValidationError(path.string() + ": annotations not strictly increasing (line " +
                            std::to_string(line_no) + ")");
    }
    peaks.push_back(value);
  }
  return peaks;
}

void save_annotations(std::span<const SampleIndex> peaks, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (SampleIndex p : peaks) out << p << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Record load_record(const std::filesystem::path& path, double fs) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open record file " + path.string());

  Record record;
  record.subject_id = path.stem().string();
  record.fs = fs;

  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty file", 1);
  const auto header = split_csv(line);
  bool has_ecg = false;
  if (header.size() == 3 && header[0] == "t" && header[1] == "scg" && header[2] == "ecg") {
    has_ecg = true;
  } else if (!(header.size() == 2 && header[0] == "t" && header[1] == "scg")) {
    throw FormatError(path.string() + ": expected header 't,scg' or 't,scg,ecg'", 1);
  }
  std::vector<double> ecg;

  std::size_t line_no = 1;
  double last_t = -INFINITY;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != (has_ecg ? 3u : 2u)) {
      throw FormatError(path.string() + ": expected " + std::to_string(has_ecg ? 3 : 2) + " fields, got " +
                            std::to_string(fields.size()),
                        line_no);
    }
    const double t = parse_double(fields[0], line_no);
    if (!(t > last_t)) throw FormatError(path.string() + ": time column not strictly increasing", line_no);
    last_t = t;
    record.scg.push_back(parse_double(fields[1], line_no));
    if (has_ecg) ecg.push_back(parse_double(fields[2], line_no));
  }
  if (has_ecg) record.ecg = std::move(ecg);

  const auto ann = annotation_path(path);
  if (std::filesystem::exists(ann)) record.rpeaks = load_annotations(ann);
  record.validate();
  return record;
}

void save_record(const Record& record, const std::filesystem::path& path) {
  record.validate();
  std::string text = record.ecg ? "t,scg,ecg\n" : "t,scg\n";
  text.reserve(record.length() * 40);
  for (std::size_t i = 0; i < record.length(); ++i) {
    text += std::to_string(i);
    text += ',';
    append_double(text, record.scg[i]);
    if (record.ecg) {
      text += ',';
      append_double(text, (*record.ecg)[i]);
    }
    text += '\n';
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
  if (record.rpeaks) save_annotations(*record.rpeaks, annotation_path(path));
}

}  // namespace seismonet::signal
