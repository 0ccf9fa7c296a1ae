#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dgc/eval/metrics.hpp"
#include "dgc/geometry/dataset.hpp"
#include "dgc/model/state.hpp"
#include "dgc/pipeline/run_config.hpp"
#include "dgc/pose/pose.hpp"

namespace dgc::pipeline {

// "train", "val" or "all".
std::vector<const geometry::LoadedPair*> select_split(const geometry::Dataset& ds,
                                                      const std::string& split);

model::PyramidConfig model_config(const RunConfig& cfg, int resolution);

struct PairEval {
  int id = 0;
  eval::EvalReport report;
};

// Evaluates the network (or, with state == nullptr, the ground truth itself)
// on every selected pair. Masked by the ground-truth mask unless `unmasked`.
std::vector<PairEval> evaluate_pairs(model::ModelState* state,
                                     const std::vector<const geometry::LoadedPair*>& pairs,
                                     const std::vector<double>& thresholds, bool unmasked);

struct PoseOptions {
  pose::RansacOptions ransac;
  pose::MatchOptions match;
  double outlier_fraction = 0.0;
  std::uint64_t seed = 0;
};

struct PoseRow {
  int id = 0;
  bool ok = false;
  std::string error;
  pose::PoseError errors{0.0, 0.0};
  std::size_t inliers = 0;
  std::size_t matches = 0;
  double median_epipolar_px = 0.0;      // against the ground-truth geometry
  std::vector<double> epipolar_px;      // per match, finite values only
};

// Replaces round(fraction * size) matches, chosen by `seed`, with uniformly
// random second-image points.
void inject_outliers(pose::MatchSet& ms, double fraction, int width, int height,
                     std::uint64_t seed);

// Dense map -> matches -> RANSAC -> pose -> angular errors for one pair.
// With state == nullptr the ground-truth map and mask stand in for the
// network output. Failures are reported in the row, never thrown.
PoseRow pose_for_pair(const geometry::LoadedPair& pair, model::ModelState* state,
                      const PoseOptions& options);

void cmd_gen_data(const RunConfig& cfg);
void cmd_train(const RunConfig& cfg);
void cmd_eval(const RunConfig& cfg);
void cmd_pose(const RunConfig& cfg);

}  // namespace dgc::pipeline
