#include <algorithm>
#include <array>
#include <numeric>
#include <random>

#include "dgc/error.hpp"
#include "dgc/pose/pose.hpp"

namespace dgc::pose {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

struct Score {
  std::size_t count = 0;
  double mean_residual = 0.0;
  std::vector<std::uint8_t> mask;
};

bool better(const Score& a, const Score& b) {
  if (a.count != b.count) return a.count > b.count;
  return a.mean_residual < b.mean_residual;
}

Score score_model(const Eigen::Matrix3d& E, const MatchSet& ms, const Eigen::Matrix3d& K1_inv,
                  const Eigen::Matrix3d& K2_inv, double threshold) {
  const Eigen::Matrix3d F = K2_inv.transpose() * E * K1_inv;
  Score s;
  s.mask.assign(ms.size(), 0);
  double total = 0.0;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const double d = symmetric_epipolar_distance(F, ms.matches[i].x, ms.matches[i].x_prime);
    if (d < threshold) {
      s.mask[i] = 1;
      ++s.count;
      total += d;
    }
  }
  s.mean_residual = s.count ? total / static_cast<double>(s.count) : 0.0;
  return s;
}

std::optional<Eigen::Matrix3d> solve_subset(const std::vector<Eigen::Vector2d>& n1,
                                            const std::vector<Eigen::Vector2d>& n2,
                                            std::span<const std::size_t> idx) {
  std::vector<Eigen::Vector2d> a, b;
  a.reserve(idx.size());
  b.reserve(idx.size());
  for (std::size_t i : idx) {
    a.push_back(n1[i]);
    b.push_back(n2[i]);
  }
  return essential_eight_point(a, b);
}

}  // namespace

EssentialEstimate estimate_essential_ransac(const MatchSet& ms, const Eigen::Matrix3d& K1,
                                            const Eigen::Matrix3d& K2,
                                            const RansacOptions& options) {
  if (ms.size() < kMinMatches) throw DataError("ransac: fewer than 8 matches");
  if (options.iterations <= 0 || options.restarts <= 0) {
    throw UsageError("ransac: iterations and restarts must be positive");
  }
  const Eigen::Matrix3d K1_inv = K1.inverse(), K2_inv = K2.inverse();
  std::vector<Eigen::Vector2d> n1(ms.size()), n2(ms.size());
  for (std::size_t i = 0; i < ms.size(); ++i) {
    n1[i] = (K1_inv * ms.matches[i].x.homogeneous()).hnormalized();
    n2[i] = (K2_inv * ms.matches[i].x_prime.homogeneous()).hnormalized();
  }

  EssentialEstimate out;
  Score best;
  Eigen::Matrix3d best_E = Eigen::Matrix3d::Zero();
  std::vector<std::size_t> pool(ms.size());
  std::array<std::size_t, kMinMatches> sample{};

  for (int r = 0; r < options.restarts; ++r) {
    std::mt19937_64 rng(splitmix64(options.seed + static_cast<std::uint64_t>(r)));
    Score restart_best;
    std::optional<Eigen::Matrix3d> restart_E;
    int done = 0;
    // Degenerate samples are redrawn; the attempt cap only guards against
    // match sets where no non-degenerate sample exists.
    for (int attempt = 0; done < options.iterations && attempt < 10 * options.iterations;
         ++attempt) {
      std::iota(pool.begin(), pool.end(), std::size_t{0});
      for (std::size_t k = 0; k < kMinMatches; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, pool.size() - 1);
        std::swap(pool[k], pool[pick(rng)]);
        sample[k] = pool[k];
      }
      const auto E = solve_subset(n1, n2, sample);
      if (!E) continue;
      ++done;
      Score s = score_model(*E, ms, K1_inv, K2_inv, options.inlier_threshold_px);
      if (!restart_E || better(s, restart_best)) {
        restart_best = std::move(s);
        restart_E = E;
      }
    }
    out.restart_best_counts.push_back(restart_E ? restart_best.count : 0);
    if (restart_E && (out.winning_restart < 0 || better(restart_best, best))) {
      best = std::move(restart_best);
      best_E = *restart_E;
      out.winning_restart = r;
    }
  }
  if (out.winning_restart < 0 || best.count < kMinMatches) {
    throw DataError("ransac: no model with at least 8 inliers");
  }

  // Refit on the consensus set; keep it only if it does not lose support.
  std::vector<std::size_t> inlier_idx;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    if (best.mask[i]) inlier_idx.push_back(i);
  }
  if (const auto refit = solve_subset(n1, n2, inlier_idx)) {
    Score s = score_model(*refit, ms, K1_inv, K2_inv, options.inlier_threshold_px);
    if (s.count >= best.count) {
      best = std::move(s);
      best_E = *refit;
    }
  }
  out.E = best_E;
  out.inliers = std::move(best.mask);
  out.inlier_count = best.count;
  out.mean_inlier_residual_px = best.mean_residual;
  return out;
}

}  // namespace dgc::pose
