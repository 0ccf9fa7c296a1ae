#include "dgc/model/config.hpp"

#include <algorithm>
#include <sstream>

#include "dgc/error.hpp"

namespace dgc::model {

std::string to_string(Correlation c) { return c == Correlation::Global ? "global" : "local"; }
std::string to_string(Parametrization p) {
  return p == Parametrization::AbsoluteMap ? "map" : "flow";
}

Correlation parse_correlation(const std::string& s) {
  if (s == "global") return Correlation::Global;
  if (s == "local") return Correlation::Local;
  throw UsageError("unknown correlation: " + s);
}

Parametrization parse_parametrization(const std::string& s) {
  if (s == "map" || s == "absolute") return Parametrization::AbsoluteMap;
  if (s == "flow") return Parametrization::Flow;
  throw UsageError("unknown parametrization: " + s);
}

PyramidConfig PyramidConfig::desk(int levels, int base_resolution) {
  if (levels < 1 || levels > 6) throw UsageError("levels must be in [1, 6]");
  static const int kEncoder[] = {16, 32, 64, 96, 128, 160};  // finest first
  static const int kTopDecoder[] = {128, 128, 96, 64, 32};
  PyramidConfig c;
  c.levels = levels;
  c.base_resolution = base_resolution;
  for (int l = 0; l < levels; ++l) {
    c.channels_per_level.push_back(kEncoder[levels - 1 - l]);
    std::vector<int> widths;
    for (int w : kTopDecoder) widths.push_back(std::max(4, w >> l));
    c.decoder_channels.push_back(widths);
    c.dilations_per_level.push_back(l >= kFirstDilatedLevel ? std::vector<int>{1, 2, 4, 4, 1}
                                                            : std::vector<int>{1, 1, 1, 1, 1});
    c.alpha.push_back(1.0);
  }
  return c;
}

int PyramidConfig::level_resolution(int level) const {
  return base_resolution >> (levels - 1 - level);
}

void PyramidConfig::validate() const {
  auto fail = [](const std::string& m) { throw UsageError("config: " + m); };
  if (levels < 1) fail("levels must be positive");
  const auto L = static_cast<std::size_t>(levels);
  if (channels_per_level.size() != L || decoder_channels.size() != L ||
      dilations_per_level.size() != L || alpha.size() != L) {
    fail("per-level lists must have one entry per level");
  }
  if (base_resolution <= 0 || base_resolution % (1 << (levels - 1)) != 0) {
    fail("resolution not divisible by 2^(levels-1)");
  }
  if (level_resolution(0) < 2) fail("top level must be at least 2x2");
  for (std::size_t l = 0; l < L; ++l) {
    if (channels_per_level[l] <= 0) fail("channel counts must be positive");
    if (decoder_channels[l].size() != kDecoderBlocks ||
        dilations_per_level[l].size() != kDecoderBlocks) {
      fail("decoders have exactly 5 blocks");
    }
    for (int w : decoder_channels[l]) {
      if (w <= 0) fail("decoder widths must be positive");
    }
    for (int d : dilations_per_level[l]) {
      if (d < 1) fail("dilations must be >= 1");
    }
    if (alpha[l] < 0.0) fail("alpha must be non-negative");
  }
  if (matchability_channels.empty() || matchability_channels.back() != 1) {
    fail("matchability head must end with one channel");
  }
  if (correlation == Correlation::Local && radius < 0) fail("radius must be >= 0");
}

namespace {

template <typename T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

template <typename T>
std::vector<T> split(const std::string& s) {
  std::vector<T> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::istringstream is(item);
    T v{};
    if (!(is >> v)) throw DataError("config: bad list value '" + s + "'");
    out.push_back(v);
  }
  return out;
}

const std::string& require(const std::map<std::string, std::string>& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw DataError("config: missing key " + key);
  return it->second;
}

int to_int(const std::string& s) {
  try {
    return std::stoi(s);
  } catch (const std::exception&) {
    throw DataError("config: bad integer '" + s + "'");
  }
}

}  // namespace

std::vector<std::pair<std::string, std::string>> PyramidConfig::to_key_values() const {
  std::vector<std::pair<std::string, std::string>> kv{
      {"levels", std::to_string(levels)},
      {"base_resolution", std::to_string(base_resolution)},
      {"channels_per_level", join(channels_per_level)},
  };
  for (int l = 0; l < levels; ++l) {
    kv.emplace_back("decoder_channels." + std::to_string(l), join(decoder_channels[l]));
  }
  for (int l = 0; l < levels; ++l) {
    kv.emplace_back("dilations." + std::to_string(l), join(dilations_per_level[l]));
  }
  kv.emplace_back("alpha", join(alpha));
  kv.emplace_back("matchability_channels", join(matchability_channels));
  kv.emplace_back("use_matchability", use_matchability ? "1" : "0");
  kv.emplace_back("correlation", to_string(correlation));
  kv.emplace_back("radius", std::to_string(radius));
  kv.emplace_back("l2norm_correlation", l2norm_correlation ? "1" : "0");
  kv.emplace_back("parametrization", to_string(parametrization));
  return kv;
}

PyramidConfig PyramidConfig::from_key_values(const std::map<std::string, std::string>& kv) {
  PyramidConfig c;
  c.levels = to_int(require(kv, "levels"));
  c.base_resolution = to_int(require(kv, "base_resolution"));
  c.channels_per_level = split<int>(require(kv, "channels_per_level"));
  c.decoder_channels.clear();
  c.dilations_per_level.clear();
  for (int l = 0; l < c.levels; ++l) {
    c.decoder_channels.push_back(split<int>(require(kv, "decoder_channels." + std::to_string(l))));
    c.dilations_per_level.push_back(split<int>(require(kv, "dilations." + std::to_string(l))));
  }
  c.alpha = split<double>(require(kv, "alpha"));
  c.matchability_channels = split<int>(require(kv, "matchability_channels"));
  c.use_matchability = require(kv, "use_matchability") == "1";
  try {
    c.correlation = parse_correlation(require(kv, "correlation"));
    c.parametrization = parse_parametrization(require(kv, "parametrization"));
  } catch (const UsageError& e) {
    throw DataError(e.what());
  }
  c.radius = to_int(require(kv, "radius"));
  c.l2norm_correlation = require(kv, "l2norm_correlation") == "1";
  try {
    c.validate();
  } catch (const UsageError& e) {
    throw DataError(e.what());
  }
  return c;
}

}  // namespace dgc::model
