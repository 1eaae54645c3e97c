#include <charconv>
#include <cmath>
#include <sstream>

#include "seismonet/error.hpp"
#include "seismonet/model.hpp"

namespace seismonet::model {

namespace {

void require(bool ok, const char* key, const std::string& what) {
  if (!ok) throw ConfigError(std::string("model.") + key, what);
}

std::size_t parse_size(const std::string& key, const std::string& value) {
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size() || value.empty()) {
    throw ConfigError("model." + key, "expected a non-negative integer, got '" + value + "'");
  }
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size() || value.empty() || !std::isfinite(out)) {
    throw ConfigError("model." + key, "expected a real number, got '" + value + "'");
  }
  return out;
}

std::string real_text(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

void ModelConfig::validate() const {
  require(levels >= 1, "levels", "must be >= 1");
  require(!inception_kernels.empty(), "inception_kernels", "must not be empty");
  for (std::size_t k : inception_kernels) require(k % 2 == 1, "inception_kernels", "all kernels must be odd");
  require(base_channels >= inception_kernels.size(), "base_channels",
          "must be >= the number of inception branches (" + std::to_string(inception_kernels.size()) + ")");
  require(base_channels % 2 == 0, "base_channels", "must be even");
  require(base_channels % 4 == 0, "base_channels",
          "must be a multiple of 4 so every expanding block has a whole channel count");
  require(ensemble_channels * 2 == base_channels, "ensemble_channels", "must equal base_channels / 2");
  require(k_p % 2 == 1, "k_p", "must be odd");
  require(k_s % 2 == 1, "k_s", "must be odd");
  require(k_st % 2 == 1, "k_st", "must be odd");
  require(ensemble_kernel % 2 == 1, "ensemble_kernel", "must be odd");
  require(stride >= 1, "stride", "must be >= 1");
  require(leaky_slope >= 0.0, "leaky_slope", "must be >= 0");
  require(bn_eps > 0.0, "bn_eps", "must be > 0");
  require(bn_momentum > 0.0 && bn_momentum <= 1.0, "bn_momentum", "must be in (0, 1]");
  require(input_len >= 1, "input_len", "must be >= 1");
  const double bottleneck = static_cast<double>(input_len) / std::pow(static_cast<double>(stride), levels);
  require(bottleneck >= 4.0, "input_len",
          "bottleneck length input_len / stride^levels = " + real_text(bottleneck) + " is below 4");
}

std::string ModelConfig::to_text() const {
  std::ostringstream out;
  out << "levels=" << levels << '\n'
      << "base_channels=" << base_channels << '\n'
      << "k_p=" << k_p << '\n'
      << "k_s=" << k_s << '\n'
      << "k_st=" << k_st << '\n'
      << "stride=" << stride << '\n'
      << "ensemble_channels=" << ensemble_channels << '\n'
      << "ensemble_kernel=" << ensemble_kernel << '\n'
      << "inception_kernels=";
  for (std::size_t i = 0; i < inception_kernels.size(); ++i) out << (i ? "," : "") << inception_kernels[i];
  out << '\n'
      << "leaky_slope=" << real_text(leaky_slope) << '\n'
      << "input_len=" << input_len << '\n'
      << "bn_momentum=" << real_text(bn_momentum) << '\n'
      << "bn_eps=" << real_text(bn_eps) << '\n';
  return out.str();
}

void ModelConfig::set(const std::string& key, const std::string& value) {
  if (key == "levels") {
    levels = parse_size(key, value);
  } else if (key == "base_channels") {
    base_channels = parse_size(key, value);
  } else if (key == "k_p") {
    k_p = parse_size(key, value);
  } else if (key == "k_s") {
    k_s = parse_size(key, value);
  } else if (key == "k_st") {
    k_st = parse_size(key, value);
  } else if (key == "stride") {
    stride = parse_size(key, value);
  } else if (key == "ensemble_channels") {
    ensemble_channels = parse_size(key, value);
  } else if (key == "ensemble_kernel") {
    ensemble_kernel = parse_size(key, value);
  } else if (key == "inception_kernels") {
    inception_kernels.clear();
    std::size_t pos = 0;
    while (pos <= value.size()) {
      const std::size_t comma = value.find(',', pos);
      const std::string item = value.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      inception_kernels.push_back(parse_size(key, item));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  } else if (key == "leaky_slope") {
    leaky_slope = parse_real(key, value);
  } else if (key == "input_len") {
    input_len = parse_size(key, value);
  } else if (key == "bn_momentum") {
    bn_momentum = parse_real(key, value);
  } else if (key == "bn_eps") {
    bn_eps = parse_real(key, value);
  } else {
    throw ConfigError("model." + key, "unknown key");
  }
}

ModelConfig ModelConfig::from_map(const std::map<std::string, std::string>& kv) {
  ModelConfig config;
  for (const auto& [k, v] : kv) config.set(k, v);
  return config;
}

LevelPlan make_plan(const ModelConfig& config) {
  config.validate();
  LevelPlan plan;
  const std::size_t n_levels = config.levels;
  plan.encoder_channels.push_back(config.ensemble_channels);
  plan.encoder_lengths.push_back(config.input_len);
  const nn::ConvSpec down{1, 1, config.k_s, config.stride, (config.k_s - 1) / 2, false};
  for (std::size_t n = 1; n <= n_levels; ++n) {
    plan.encoder_channels.push_back(plan.encoder_channels.back() * 2);
    plan.encoder_lengths.push_back(down.output_length(plan.encoder_lengths.back()));
  }
  std::size_t width = plan.bottleneck_channels() / 4;
  for (std::size_t n = 1; n <= n_levels; ++n) {
    plan.decoder_channels.push_back(width);
    plan.decoder_lengths.push_back(plan.encoder_lengths[n_levels - n]);
    width /= 2;
  }
  return plan;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over (seed, stream)
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace seismonet::model
