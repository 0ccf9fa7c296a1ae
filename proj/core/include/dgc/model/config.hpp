#pragma once

#include <map>
#include <string>
#include <vector>

namespace dgc::model {

enum class Correlation { Global, Local };
enum class Parametrization { AbsoluteMap, Flow };

std::string to_string(Correlation c);
std::string to_string(Parametrization p);
Correlation parse_correlation(const std::string& s);
Parametrization parse_parametrization(const std::string& s);

/// Network hyperparameters. Every per-level list is indexed coarsest first,
/// so level l has spatial size base_resolution / 2^(levels - 1 - l).
struct PyramidConfig {
  int levels = 4;
  int base_resolution = 64;
  std::vector<int> channels_per_level;               // encoder feature widths
  std::vector<std::vector<int>> decoder_channels;    // 5 block widths per level
  std::vector<std::vector<int>> dilations_per_level;  // 5 dilations per level
  std::vector<double> alpha;
  std::vector<int> matchability_channels{32, 32, 16, 1};
  bool use_matchability = false;
  Correlation correlation = Correlation::Global;
  int radius = 4;
  bool l2norm_correlation = true;  // normalize features before and the volume after correlation
  Parametrization parametrization = Parametrization::AbsoluteMap;

  // Desk-scale defaults: encoder 16/32/64/96 (finest to coarsest), decoder
  // widths [128, 128, 96, 64, 32] at the top level halved at every finer
  // level (floor 4), dilations [1, 2, 4, 4, 1] from level 3 on, alpha = 1.
  static PyramidConfig desk(int levels = 4, int base_resolution = 64);

  int level_resolution(int level) const;
  // Throws UsageError on inconsistent lists or a resolution not divisible
  // by 2^(levels - 1).
  void validate() const;

  // Stable key=value encoding used by checkpoints and run logs.
  std::vector<std::pair<std::string, std::string>> to_key_values() const;
  static PyramidConfig from_key_values(const std::map<std::string, std::string>& kv);

  bool operator==(const PyramidConfig&) const = default;
};

inline constexpr int kDecoderBlocks = 5;
inline constexpr int kFirstDilatedLevel = 3;

}  // namespace dgc::model
