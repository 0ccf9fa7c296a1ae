#pragma once

// Layer layout shared by parameter initialization and the forward pass.

#include <string>
#include <vector>

#include "dgc/model/config.hpp"

namespace dgc::model::arch {

struct ConvSpec {
  std::string name;  // prefix, e.g. "enc.3.conv0"
  int in = 0;
  int out = 0;
  int stride = 1;
  int dilation = 1;
  bool batchnorm = true;  // Conv-BN-ReLU; otherwise linear conv with bias
};

inline std::string level_prefix(const char* part, int level) {
  return std::string(part) + "." + std::to_string(level);
}

// Encoder convs producing level `level` features from the next finer level
// (or from the RGB image at the finest level).
inline std::vector<ConvSpec> encoder_level(const PyramidConfig& c, int level) {
  const int out = c.channels_per_level[level];
  const bool finest = level == c.levels - 1;
  const int in = finest ? 3 : c.channels_per_level[level + 1];
  const int convs = level <= 1 && !finest ? 3 : 2;
  const std::string p = level_prefix("enc", level);
  std::vector<ConvSpec> v{{p + ".conv0", in, out, finest ? 1 : 2, 1, true}};
  for (int k = 1; k < convs; ++k) v.push_back({p + ".conv" + std::to_string(k), out, out, 1, 1, true});
  return v;
}

inline int correlation_channels(const PyramidConfig& c, int level) {
  if (c.correlation == Correlation::Local) return (2 * c.radius + 1) * (2 * c.radius + 1);
  const int r = c.level_resolution(level);
  return r * r;
}

inline int decoder_input_channels(const PyramidConfig& c, int level) {
  if (level == 0) return correlation_channels(c, 0);
  if (c.correlation == Correlation::Local) return 2 + correlation_channels(c, level);
  return 2 + 2 * c.channels_per_level[level];
}

inline std::vector<ConvSpec> decoder_level(const PyramidConfig& c, int level) {
  const std::string p = level_prefix("dec", level);
  std::vector<ConvSpec> v;
  int in = decoder_input_channels(c, level);
  for (int b = 0; b < kDecoderBlocks; ++b) {
    const int out = c.decoder_channels[level][b];
    v.push_back({p + ".block" + std::to_string(b), in, out, 1, c.dilations_per_level[level][b], true});
    in = out;
  }
  v.push_back({p + ".out", in, 2, 1, 1, false});
  return v;
}

inline std::vector<ConvSpec> matchability_head(const PyramidConfig& c) {
  std::vector<ConvSpec> v;
  int in = c.decoder_channels[c.levels - 1].back();
  for (std::size_t k = 0; k < c.matchability_channels.size(); ++k) {
    const int out = c.matchability_channels[k];
    const bool last = k + 1 == c.matchability_channels.size();
    v.push_back({"match.conv" + std::to_string(k), in, out, 1, 1, !last});
    in = out;
  }
  return v;
}

}  // namespace dgc::model::arch
