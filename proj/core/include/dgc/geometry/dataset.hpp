#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dgc/geometry/render.hpp"
#include "dgc/pose/camera.hpp"

namespace dgc::geometry {

// Pair kinds: the three warp families plus "pose", two calibrated views of a
// textured non-planar scene with a recorded relative pose.
enum class PairKind { Affine, Homography, Tps, Pose };

std::string to_string(PairKind kind);
// Accepts "affine", "homo"/"homography", "tps" and "pose".
PairKind parse_pair_kind(const std::string& name);
std::vector<PairKind> parse_pair_kinds(const std::string& comma_separated);

struct DatasetSpec {
  int count = 10;
  std::vector<PairKind> kinds{PairKind::Affine};
  double strength = 0.2;
  std::uint64_t seed = 0;
  int resolution = 64;
  double val_fraction = 0.1;
};

enum class Split { Train, Val };

struct PairRecord {
  int id = 0;
  PairKind kind = PairKind::Affine;
  std::uint64_t seed = 0;
  Split split = Split::Train;
};

struct Manifest {
  int resolution = 0;
  double strength = 0.0;
  std::uint64_t seed = 0;
  std::vector<PairRecord> pairs;
};

struct RelativePoseGt {
  Eigen::Matrix3d K1;  // target camera
  Eigen::Matrix3d K2;  // source camera
  Eigen::Matrix3d R;   // X_source = R X_target + t
  Eigen::Vector3d t;
};

struct GeneratedPair {
  TrainingPair pair;
  std::optional<RelativePoseGt> pose;
};

// Per-pair seed: dataset seed xor pair index.
std::uint64_t pair_seed(std::uint64_t dataset_seed, int index);

// Kinds assigned round-robin; the last round(count * val_fraction) ids form
// the validation split. Rejected draws are resampled from the pair's stream.
Manifest make_manifest(const DatasetSpec& spec);
GeneratedPair generate_pair(const PairRecord& record, int resolution, double strength);

// Writes manifest.txt and the per-pair files under `dir` (created if needed).
Manifest generate_dataset(const DatasetSpec& spec, const std::filesystem::path& dir);

void write_manifest(const std::filesystem::path& path, const Manifest& m);
Manifest read_manifest(const std::filesystem::path& path);

void write_map(const std::filesystem::path& path, const CorrespondenceMap& m);
CorrespondenceMap read_map(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const MatchabilityMask& m);
MatchabilityMask read_mask(const std::filesystem::path& path);
void write_pose(const std::filesystem::path& path, const RelativePoseGt& p);
RelativePoseGt read_pose(const std::filesystem::path& path);

std::string pair_file(const std::filesystem::path& dir, int id, const char* suffix);

struct LoadedPair {
  PairRecord record;
  TrainingPair pair;  // transform left as identity: it is not stored on disk
  std::optional<RelativePoseGt> pose;
};

struct Dataset {
  Manifest manifest;
  std::vector<LoadedPair> pairs;

  std::vector<const LoadedPair*> split(Split s) const;
};

// Loads every pair listed in the manifest; throws DataError on missing or
// malformed files.
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace dgc::geometry
