#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/SVD>

#include "dgc/error.hpp"
#include "dgc/pose/pose.hpp"

namespace dgc::pose {
namespace {

using Eigen::Matrix3d;
using Eigen::Vector2d;
using Eigen::Vector3d;

constexpr double kDeg = std::numbers::pi / 180.0;

struct Scene {
  Matrix3d R;
  Vector3d t;
  Matrix3d K;
  std::vector<Vector2d> n1, n2;  // calibrated coordinates
  MatchSet ms;                   // pixel coordinates
};

Vector2d project(const Matrix3d& K, const Vector3d& X) {
  const Vector3d p = K * X;
  return p.head<2>() / p.z();
}

// Random points in front of both cameras, X2 = R X1 + t.
Scene make_scene(const Matrix3d& R, const Vector3d& t, int n, std::uint64_t seed) {
  Scene s{R, t, intrinsics(200.0, 200.0, 100.0, 100.0), {}, {}, {}};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> xy(-1.5, 1.5), z(4.0, 8.0);
  while (static_cast<int>(s.n1.size()) < n) {
    const Vector3d X1(xy(rng), xy(rng), z(rng));
    const Vector3d X2 = R * X1 + t;
    if (X2.z() < 1.0) continue;
    s.n1.push_back(X1.head<2>() / X1.z());
    s.n2.push_back(X2.head<2>() / X2.z());
    s.ms.matches.push_back({project(s.K, X1), project(s.K, X2), 1.0});
  }
  return s;
}

Scene default_scene(int n = 100, std::uint64_t seed = 1) {
  return make_scene(axis_angle({0.2, 1.0, -0.3}, 8.0 * kDeg), Vector3d(0.8, 0.1, 0.2), n, seed);
}

// ---- epipolar distance --------------------------------------------------------

TEST(Epipolar, HandConstructedThreePixels) {
  // F x = (1, 0, 0) is the line u = 0; F^T x' = (1, 0, 3) is the line u = -3.
  Matrix3d F;
  F << 0, 0, 1, 0, 0, 0, 1, 0, 0;
  EXPECT_NEAR(symmetric_epipolar_distance(F, {0.0, 0.0}, {3.0, 5.0}), 3.0, 1e-9);
}

TEST(Epipolar, ExactCorrespondencesGiveZero) {
  const auto s = default_scene();
  const Matrix3d F = fundamental_from_essential(essential_from_pose(s.R, s.t), s.K, s.K);
  const auto summary = symmetric_epipolar_error(s.ms, F);
  ASSERT_EQ(summary.distances.size(), s.ms.size());
  for (double d : summary.distances) EXPECT_LT(d, 1e-9);
}

TEST(Epipolar, InvariantToScalingF) {
  const auto s = default_scene(20);
  const Matrix3d F = fundamental_from_essential(essential_from_pose(s.R, s.t), s.K, s.K);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> noise(0.0, 2.0);
  for (const auto& m : s.ms.matches) {
    const Vector2d xp = m.x_prime + Vector2d(noise(rng), noise(rng));
    const double d = symmetric_epipolar_distance(F, m.x, xp);
    for (double k : {-3.0, 1e-4, 250.0}) {
      EXPECT_NEAR(symmetric_epipolar_distance(k * F, m.x, xp), d, 1e-9 * std::max(1.0, d));
    }
  }
}

TEST(Epipolar, DegenerateLineIsInfiniteAndExcluded) {
  Matrix3d F = Matrix3d::Zero();
  F(2, 2) = 1.0;
  EXPECT_TRUE(std::isinf(symmetric_epipolar_distance(F, {1.0, 2.0}, {3.0, 4.0})));

  Matrix3d G;
  G << 0, 0, 1, 0, 0, 0, 1, 0, 0;
  MatchSet ms;
  ms.matches = {{{0, 0}, {3, 5}, 1.0}, {{0, 0}, {1, 0}, 1.0}, {{-1, 0}, {5, 0}, 1.0}};
  const auto deg = symmetric_epipolar_error(ms, F);
  EXPECT_EQ(deg.finite, 0u);
  const auto ok = symmetric_epipolar_error(ms, G);
  EXPECT_EQ(ok.finite, 3u);
  // distances 3, 1 and sqrt((4^2 + 4^2) / 2) = 4
  EXPECT_NEAR(ok.median, 3.0, 1e-12);
}

TEST(Epipolar, CumulativeHistogram) {
  const std::vector<double> values{0.5, 1.0, 2.0, std::numeric_limits<double>::infinity()};
  const std::vector<double> thresholds{0.25, 1.0, 2.0, 100.0};
  const auto h = cumulative_histogram(values, thresholds);
  ASSERT_EQ(h.size(), 4u);
  EXPECT_EQ(h[0].cumulative_fraction, 0.0);
  EXPECT_EQ(h[1].cumulative_fraction, 0.5);
  EXPECT_EQ(h[2].cumulative_fraction, 0.75);
  EXPECT_EQ(h[3].cumulative_fraction, 0.75);
  EXPECT_EQ(h[3].threshold, 100.0);
}

// ---- matches from maps ------------------------------------------------------

TEST(Matches, IdentityMapGivesFixedPoints) {
  const auto ms = matches_from_map(geometry::identity_map(16, 12), std::nullopt);
  EXPECT_EQ(ms.size(), 8u * 6u);
  for (const auto& m : ms.matches) {
    EXPECT_NEAR((m.x - m.x_prime).norm(), 0.0, 1e-5);
    EXPECT_EQ(std::fmod(m.x.x(), 2.0), 0.0);
    EXPECT_EQ(std::fmod(m.x.y(), 2.0), 0.0);
  }
}

TEST(Matches, ConfidenceThresholdSelectsExactly) {
  const auto map = geometry::identity_map(16, 16);
  std::vector<float> conf(256, 0.2f);
  for (std::size_t k = 0; k < 128; ++k) conf[k] = 0.95f;  // top half
  const auto ms = matches_from_map(map, std::span<const float>(conf), {0.9f, 2});
  EXPECT_EQ(ms.size(), 4u * 8u);
  for (const auto& m : ms.matches) EXPECT_LT(m.x.y(), 8.0);
  EXPECT_THROW(matches_from_map(map, std::span<const float>(conf), {1.01f, 2}), DataError);
}

TEST(Matches, OutOfFrameTargetsAreDropped) {
  auto map = geometry::identity_map(16, 16);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 8; ++j) map.set(i, j, 1.5, 0.0);
  EXPECT_EQ(matches_from_map(map, std::nullopt).size(), 8u * 4u);
}

TEST(Matches, TooFewIsDataError) {
  try {
    matches_from_map(geometry::identity_map(4, 4), std::nullopt, {0.5f, 2});
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("fewer than 8 matches"), std::string::npos);
  }
}

// ---- essential matrix -------------------------------------------------------

void expect_essential_constraints(Matrix3d E) {
  E /= E.norm();
  EXPECT_LT(std::abs(E.determinant()), 1e-9);
  const Matrix3d c = 2.0 * E * E.transpose() * E - (E * E.transpose()).trace() * E;
  EXPECT_LT(c.norm(), 1e-8);
}

TEST(EightPoint, ExactMatchesSatisfyConstraints) {
  const auto s = default_scene();
  const auto E = essential_eight_point(s.n1, s.n2);
  ASSERT_TRUE(E.has_value());
  const Matrix3d En = *E / E->norm();
  for (std::size_t k = 0; k < s.n1.size(); ++k) {
    EXPECT_LT(std::abs(s.n2[k].homogeneous().dot(En * s.n1[k].homogeneous())), 1e-8);
  }
  expect_essential_constraints(*E);
  const Eigen::JacobiSVD<Matrix3d> svd(*E);
  EXPECT_NEAR(svd.singularValues()(0), svd.singularValues()(1), 1e-12 * svd.singularValues()(0));
}

TEST(EightPoint, RankDeficientInputIsRejected) {
  std::vector<Vector2d> same(8, Vector2d(0.1, 0.2));
  EXPECT_FALSE(essential_eight_point(same, same).has_value());
}

MatchSet with_outliers(const Scene& s, int outliers, std::uint64_t seed) {
  MatchSet ms = s.ms;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> px(0.0, 200.0);
  for (int k = 0; k < outliers; ++k) ms.matches.push_back({{px(rng), px(rng)}, {px(rng), px(rng)}, 1.0});
  return ms;
}

TEST(Ransac, RecoversInliersAmongOutliers) {
  const auto s = default_scene(70, 5);
  const auto ms = with_outliers(s, 30, 6);
  RansacOptions opt;
  opt.seed = 7;
  const auto est = estimate_essential_ransac(ms, s.K, s.K, opt);
  std::size_t true_found = 0;
  for (std::size_t k = 0; k < 70; ++k) true_found += est.inliers[k];
  EXPECT_GE(true_found, 67u);  // >= 95% of 70
  EXPECT_EQ(est.restart_best_counts.size(), 5u);
  expect_essential_constraints(est.E);
  // Inlier residuals stay below the threshold.
  EXPECT_LT(est.mean_inlier_residual_px, opt.inlier_threshold_px);
}

TEST(Ransac, FixedSeedIsDeterministic) {
  const auto s = default_scene(60, 8);
  const auto ms = with_outliers(s, 40, 9);
  RansacOptions opt;
  opt.iterations = 200;
  opt.seed = 10;
  const auto a = estimate_essential_ransac(ms, s.K, s.K, opt);
  const auto b = estimate_essential_ransac(ms, s.K, s.K, opt);
  EXPECT_EQ(a.E, b.E);
  EXPECT_EQ(a.inliers, b.inliers);
  EXPECT_EQ(a.winning_restart, b.winning_restart);
}

TEST(Ransac, MoreRestartsNeverLoseInliers) {
  auto s = default_scene(60, 11);
  std::mt19937_64 rng(12);
  std::normal_distribution<double> noise(0.0, 0.6);
  for (auto& m : s.ms.matches) m.x_prime += Vector2d(noise(rng), noise(rng));
  const auto ms = with_outliers(s, 60, 13);
  std::size_t prev = 0;
  for (int restarts = 1; restarts <= 6; ++restarts) {
    RansacOptions opt;
    opt.iterations = 15;
    opt.restarts = restarts;
    opt.seed = 14;
    const auto est = estimate_essential_ransac(ms, s.K, s.K, opt);
    const std::size_t best =
        *std::max_element(est.restart_best_counts.begin(), est.restart_best_counts.end());
    EXPECT_GE(best, prev) << restarts;
    prev = best;
  }
}

TEST(Ransac, TooFewMatchesIsDataError) {
  const auto s = default_scene(7);
  EXPECT_THROW(estimate_essential_ransac(s.ms, s.K, s.K), DataError);
}

// ---- pose recovery and errors -------------------------------------------------

TEST(RecoverPose, CanonicalXTranslation) {
  const auto s = make_scene(Matrix3d::Identity(), Vector3d::UnitX(), 50, 15);
  const Matrix3d E = skew(Vector3d::UnitX());
  for (double sign : {1.0, -1.0}) {
    const auto p = recover_pose(sign * E, s.ms, s.K, s.K);
    EXPECT_LT((p.R - Matrix3d::Identity()).norm(), 1e-6);
    EXPECT_LT((p.t - Vector3d::UnitX()).norm(), 1e-6);
    EXPECT_EQ(p.positive_depth, 50u);
  }
}

TEST(RecoverPose, SyntheticPoseWithinMillidegree) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(100 + seed);
    std::normal_distribution<double> n01;
    const Matrix3d R = axis_angle({n01(rng), n01(rng), n01(rng)}, 12.0 * kDeg);
    const Vector3d t(n01(rng), 0.3 * n01(rng), 0.2 * n01(rng));
    const auto s = make_scene(R, t, 80, seed);
    const auto E = essential_eight_point(s.n1, s.n2);
    ASSERT_TRUE(E.has_value());
    const auto p = recover_pose(*E, s.ms, s.K, s.K);
    const auto err = pose_errors(p.R, p.t, R, t);
    EXPECT_LT(err.rotation_deg, 1e-3);
    EXPECT_LT(err.translation_deg, 1e-3);
    EXPECT_NEAR(p.t.norm(), 1.0, 1e-12);
    const auto neg = recover_pose(-*E, s.ms, s.K, s.K);
    EXPECT_LT((neg.R - p.R).norm(), 1e-9);
    EXPECT_LT((neg.t - p.t).norm(), 1e-9);
  }
}

TEST(PoseErrors, ClosedForms) {
  const Matrix3d Rg = axis_angle({1.0, 2.0, 0.5}, 0.7);
  const Vector3d tg(0.3, -0.4, 1.2);
  const auto zero = pose_errors(Rg, tg, Rg, tg);
  EXPECT_NEAR(zero.rotation_deg, 0.0, 1e-6);
  EXPECT_NEAR(zero.translation_deg, 0.0, 1e-6);
  const Matrix3d Re = axis_angle(Vector3d::UnitZ(), 10.0 * kDeg) * Rg;
  EXPECT_NEAR(pose_errors(Re, tg, Rg, tg).rotation_deg, 10.0, 1e-9);
  EXPECT_NEAR(pose_errors(Rg, -tg, Rg, tg).translation_deg, 0.0, 1e-6);
  EXPECT_NEAR(pose_errors(Rg, 5.0 * tg, Rg, tg).translation_deg, 0.0, 1e-6);
  EXPECT_NEAR(pose_errors(Rg, Vector3d::UnitX(), Rg, Vector3d::UnitY()).translation_deg, 90.0, 1e-9);
}

TEST(PoseErrors, Symmetric) {
  std::mt19937_64 rng(16);
  std::normal_distribution<double> n01;
  for (int k = 0; k < 10; ++k) {
    const Matrix3d A = axis_angle({n01(rng), n01(rng), n01(rng)}, n01(rng));
    const Matrix3d B = axis_angle({n01(rng), n01(rng), n01(rng)}, n01(rng));
    const Vector3d a(n01(rng), n01(rng), n01(rng)), b(n01(rng), n01(rng), n01(rng));
    const auto ab = pose_errors(A, a, B, b), ba = pose_errors(B, b, A, a);
    EXPECT_NEAR(ab.rotation_deg, ba.rotation_deg, 1e-9);
    EXPECT_NEAR(ab.translation_deg, ba.translation_deg, 1e-9);
  }
}

TEST(Camera, FundamentalFromEssential) {
  const auto s = default_scene(10);
  const Matrix3d E = essential_from_pose(s.R, s.t);
  EXPECT_LT((E - skew(s.t) * s.R).norm(), 1e-15);
  const Matrix3d F = fundamental_from_essential(E, s.K, s.K);
  for (const auto& m : s.ms.matches) {
    EXPECT_LT(std::abs(m.x_prime.homogeneous().dot(F * m.x.homogeneous())), 1e-9);
  }
  const Matrix3d K = default_intrinsics(64, 48);
  EXPECT_EQ(K(0, 0), 64.0);
  EXPECT_EQ(K(1, 1), 64.0);
  EXPECT_EQ(K(0, 2), 31.5);
  EXPECT_EQ(K(1, 2), 23.5);
}

}  // namespace
}  // namespace dgc::pose
