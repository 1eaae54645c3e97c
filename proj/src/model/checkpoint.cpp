#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "seismonet/error.hpp"
#include "seismonet/model.hpp"

namespace seismonet::model {

namespace {

template <typename U>
void put_le(std::ostream& out, U v) {
  unsigned char bytes[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(U));
}

class Reader {
 public:
  Reader(std::istream& in, const std::filesystem::path& path) : in_(in), path_(path.string()) {}

  template <typename U>
  U le() {
    unsigned char bytes[sizeof(U)];
    read(bytes, sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(bytes[i]) << (8 * i);
    return v;
  }

  std::string text(std::size_t n) {
    std::string s(n, '\0');
    read(s.data(), n);
    return s;
  }

  void read(void* dst, std::size_t n) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw FormatError("checkpoint " + path_ + ": truncated");
  }

  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  std::istream& in_;
  std::string path_;
};

// Rejects absurd sizes before allocating.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 32;
constexpr std::uint32_t kMaxText = 1u << 20;

}  // namespace

void save_checkpoint(const SeismoNet<float>& model, const std::filesystem::path& path, std::size_t epoch) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  put_le<std::uint32_t>(out, kCheckpointVersion);
  const std::string config = model.config().to_text() + "epoch=" + std::to_string(epoch) + "\n";
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(config.size()));
  out.write(config.data(), static_cast<std::streamsize>(config.size()));
  for (const auto& p : model.params()) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(p->dims.size()));
    for (std::size_t d : p->dims) put_le<std::uint64_t>(out, d);
    for (float v : p->value) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint " + path.string());
  Reader r(in, path);
  const std::string where = "checkpoint " + path.string();

  char magic[sizeof(kCheckpointMagic)];
  r.read(magic, sizeof(magic));
  if (std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) throw FormatError(where + ": bad magic");
  const auto version = r.le<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw FormatError(where + ": unsupported version " + std::to_string(version));
  }

  const auto text_len = r.le<std::uint32_t>();
  if (text_len > kMaxText) throw FormatError(where + ": config block too large");
  std::istringstream text(r.text(text_len));
  std::map<std::string, std::string> kv;
  std::size_t epoch = 0;
  std::string line;
  while (std::getline(text, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError(where + ": malformed config line '" + line + "'");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "epoch") {
      auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), epoch);
      if (ec != std::errc{} || ptr != value.data() + value.size()) throw FormatError(where + ": bad epoch");
    } else {
      kv[key] = value;
    }
  }

  LoadedCheckpoint loaded{SeismoNet<float>(ModelConfig::from_map(kv), 0), epoch};
  auto& params = loaded.model.params();
  std::set<std::string> seen;
  while (!r.at_end()) {
    const std::string name = r.text(r.le<std::uint32_t>());
    auto* p = params.find(name);
    if (!p) throw FormatError(where + ": unknown tensor '" + name + "'");
    if (!seen.insert(name).second) throw FormatError(where + ": duplicate tensor '" + name + "'");
    const auto rank = r.le<std::uint32_t>();
    std::vector<std::size_t> dims(rank);
    std::uint64_t count = 1;
    for (auto& d : dims) {
      const auto v = r.le<std::uint64_t>();
      count *= v;
      if (count > kMaxElements) throw FormatError(where + ": tensor '" + name + "' too large");
      d = static_cast<std::size_t>(v);
    }
    if (dims != p->dims) throw FormatError(where + ": shape mismatch for tensor '" + name + "'");
    for (auto& v : p->value) v = std::bit_cast<float>(r.le<std::uint32_t>());
  }
  if (seen.size() != params.size()) {
    throw FormatError(where + ": truncated (" + std::to_string(seen.size()) + " of " +
                      std::to_string(params.size()) + " tensors)");
  }
  return loaded;
}

}  // namespace seismonet::model
