#include "dgc/pipeline/run_config.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <openssl/sha.h>

#include "dgc/error.hpp"

namespace dgc::pipeline {

std::string to_string(Command c) {
  switch (c) {
    case Command::GenData: return "gen-data";
    case Command::Train: return "train";
    case Command::Eval: return "eval";
    case Command::Pose: return "pose";
  }
  return "?";
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), r.ptr);
}

namespace {

std::string b(bool v) { return v ? "true" : "false"; }

}  // namespace

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& c, Command cmd) {
  std::vector<std::pair<std::string, std::string>> kv;
  auto add = [&](const char* k, std::string v) { kv.emplace_back(k, std::move(v)); };
  switch (cmd) {
    case Command::GenData:
      add("n", std::to_string(c.n));
      add("kinds", c.kinds);
      add("strength", format_double(c.strength));
      add("seed", std::to_string(c.seed));
      add("resolution", std::to_string(c.resolution));
      add("val-fraction", format_double(c.val_fraction));
      add("out", c.out);
      break;
    case Command::Train:
      add("data", c.data);
      add("out", c.out);
      add("resume", c.resume);
      add("seed", std::to_string(c.seed));
      add("levels", std::to_string(c.levels));
      add("matchability", b(c.matchability));
      add("correlation", c.correlation);
      add("radius", std::to_string(c.radius));
      add("no-l2norm", b(c.no_l2norm));
      add("parametrization", c.parametrization);
      add("lr", format_double(c.lr));
      add("epochs", std::to_string(c.epochs));
      add("batch", std::to_string(c.batch));
      add("freeze-encoder", b(c.freeze_encoder));
      add("beta", format_double(c.beta));
      break;
    case Command::Eval:
      add("data", c.data);
      add("out", c.out);
      add("checkpoint", c.checkpoint);
      add("split", c.split);
      add("thresholds", c.thresholds);
      add("unmasked", b(c.unmasked));
      add("use-gt-map", b(c.use_gt_map));
      break;
    case Command::Pose:
      add("data", c.data);
      add("out", c.out);
      add("checkpoint", c.checkpoint);
      add("split", c.split);
      add("seed", std::to_string(c.seed));
      add("use-gt-map", b(c.use_gt_map));
      add("iters", std::to_string(c.iters));
      add("restarts", std::to_string(c.restarts));
      add("inlier-px", format_double(c.inlier_px));
      add("stride", std::to_string(c.stride));
      add("conf-threshold", format_double(c.conf_threshold));
      add("outlier-fraction", format_double(c.outlier_fraction));
      break;
  }
  return kv;
}

std::string echo_config(const RunConfig& cfg, Command c) {
  std::string s;
  for (const auto& [k, v] : config_entries(cfg, c)) s += k + "=" + v + "\n";
  return s;
}

std::vector<std::string> config_file_arguments(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw UsageError("cannot read config file " + path.string());
  std::vector<std::string> args;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return std::string();
    const auto z = s.find_last_not_of(" \t\r");
    return s.substr(a, z - a + 1);
  };
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) throw UsageError(path.string() + ":" + std::to_string(lineno) + ": empty key");
    args.push_back("--" + key + "=" + value);
  }
  return args;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_thresholds(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) {
    double v = 0.0;
    const auto r = std::from_chars(item.data(), item.data() + item.size(), v);
    if (r.ec != std::errc() || r.ptr != item.data() + item.size() || !(v > 0.0)) {
      throw UsageError("bad threshold '" + item + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("no thresholds given");
  return out;
}

std::string git_blob_hash(const std::string& content) {
  const std::string data = "blob " + std::to_string(content.size()) + std::string(1, '\0') + content;
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(data.data()), data.size(), digest);
  std::string hex;
  char buf[3];
  for (unsigned char d : digest) {
    std::snprintf(buf, sizeof buf, "%02x", d);
    hex += buf;
  }
  return hex;
}

std::string git_blob_hash_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return git_blob_hash(ss.str());
}

}  // namespace dgc::pipeline
