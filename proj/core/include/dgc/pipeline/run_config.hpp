#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace dgc::pipeline {

enum class Command { GenData, Train, Eval, Pose };

std::string to_string(Command c);

/// Parameters of one CLI invocation. Every field has a default; the subset
/// relevant to a command is echoed to its run log as key=value lines, and
/// that echo parses back to the same configuration.
struct RunConfig {
  // dataset
  int n = 10;
  std::string kinds = "affine";
  double strength = 0.2;
  std::uint64_t seed = 0;
  int resolution = 64;
  double val_fraction = 0.1;

  // model
  int levels = 4;
  bool matchability = false;
  std::string correlation = "global";
  int radius = 4;
  bool no_l2norm = false;
  std::string parametrization = "map";

  // training
  double lr = 1e-3;
  int epochs = 30;
  int batch = 8;
  bool freeze_encoder = false;
  double beta = 1.0;
  std::string resume;

  // evaluation
  std::string thresholds = "1,3,5";
  bool unmasked = false;
  bool use_gt_map = false;
  std::string split = "val";

  // pose
  int iters = 1000;
  int restarts = 5;
  double inlier_px = 1.0;
  int stride = 2;
  double conf_threshold = 0.5;
  double outlier_fraction = 0.0;

  // io
  std::string data;
  std::string out;
  std::string checkpoint;
};

// Key names are the long flag names without the leading dashes.
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& cfg, Command c);
std::string echo_config(const RunConfig& cfg, Command c);

// Reads a key=value file ('#' starts a comment, blank lines ignored) into
// "--key=value" tokens, in file order.
std::vector<std::string> config_file_arguments(const std::filesystem::path& path);

std::vector<double> parse_thresholds(const std::string& s);
std::vector<std::string> split_list(const std::string& s);

// Canonical shortest round-trip text for a double.
std::string format_double(double v);

// Hex SHA-1 of "blob <size>\0<content>", as git computes for a file.
std::string git_blob_hash(const std::string& content);
std::string git_blob_hash_file(const std::filesystem::path& path);

}  // namespace dgc::pipeline
