#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>

#include "dgc/geometry/correspondence.hpp"
#include "dgc/pose/camera.hpp"

namespace dgc::pose {

// A tentative correspondence in pixel coordinates: x in the first image
// (the map grid), x_prime in the second.
struct Match {
  Eigen::Vector2d x;
  Eigen::Vector2d x_prime;
  double confidence = 1.0;
};

struct MatchSet {
  std::vector<Match> matches;
  std::size_t size() const { return matches.size(); }
};

inline constexpr std::size_t kMinMatches = 8;

struct MatchOptions {
  float threshold = 0.5f;
  int stride = 2;
};

// One match per stride-sampled grid pixel whose confidence (1 when no map is
// given) is >= threshold and whose target lies in frame. Throws DataError
// with "fewer than 8 matches" when too few survive.
MatchSet matches_from_map(const geometry::CorrespondenceMap& map,
                          std::optional<std::span<const float>> confidence,
                          const MatchOptions& options = {});

// ---- epipolar geometry ---------------------------------------------------

// sqrt((d^2(x', F x) + d^2(x, F^T x')) / 2); +inf for a degenerate line.
double symmetric_epipolar_distance(const Eigen::Matrix3d& F, const Eigen::Vector2d& x,
                                   const Eigen::Vector2d& x_prime);

struct EpipolarSummary {
  std::vector<double> distances;  // per match, +inf when undefined
  double median = 0.0;            // over finite distances
  std::size_t finite = 0;
};

EpipolarSummary symmetric_epipolar_error(const MatchSet& ms, const Eigen::Matrix3d& F);

struct HistogramBin {
  double threshold;
  double cumulative_fraction;
};

// Fraction of `values` at or below each threshold, normalized by values.size().
std::vector<HistogramBin> cumulative_histogram(std::span<const double> values,
                                               std::span<const double> thresholds);

// ---- essential matrix ------------------------------------------------------

// Normalized 8-point solve on calibrated coordinates (>= 8 pairs), Hartley
// conditioned, projected on the essential manifold (singular values s, s, 0).
// Returns nullopt when the linear system is rank deficient.
std::optional<Eigen::Matrix3d> essential_eight_point(std::span<const Eigen::Vector2d> x1,
                                                     std::span<const Eigen::Vector2d> x2);

struct RansacOptions {
  int iterations = 1000;
  int restarts = 5;
  double inlier_threshold_px = 1.0;
  std::uint64_t seed = 0;
};

struct EssentialEstimate {
  Eigen::Matrix3d E = Eigen::Matrix3d::Zero();
  std::vector<std::uint8_t> inliers;  // per match
  std::size_t inlier_count = 0;
  double mean_inlier_residual_px = 0.0;
  int winning_restart = -1;
  std::vector<std::size_t> restart_best_counts;  // best count seen by each restart
};

EssentialEstimate estimate_essential_ransac(const MatchSet& ms, const Eigen::Matrix3d& K1,
                                            const Eigen::Matrix3d& K2,
                                            const RansacOptions& options = {});

// ---- pose recovery -----------------------------------------------------------

struct RelativePose {
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::UnitX();  // unit norm
  std::size_t positive_depth = 0;
};

// Chooses among the four decompositions of E the one placing the most
// midpoint-triangulated matches in front of both cameras. `use` optionally
// restricts the matches (e.g. RANSAC inliers).
RelativePose recover_pose(const Eigen::Matrix3d& E, const MatchSet& ms, const Eigen::Matrix3d& K1,
                          const Eigen::Matrix3d& K2,
                          std::span<const std::uint8_t> use = {});

struct PoseError {
  double rotation_deg;
  double translation_deg;
};

// Rotation: angle of R_est^T R_gt. Translation: arccos(|<t_est, t_gt>|) on the
// unit vectors, invariant to the unobservable sign and scale.
PoseError pose_errors(const Eigen::Matrix3d& R_est, const Eigen::Vector3d& t_est,
                      const Eigen::Matrix3d& R_gt, const Eigen::Vector3d& t_gt);

}  // namespace dgc::pose
