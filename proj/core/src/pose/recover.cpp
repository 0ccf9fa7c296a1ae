#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "dgc/error.hpp"
#include "dgc/pose/pose.hpp"

namespace dgc::pose {

namespace {

// Midpoint of the closest points of rays c1 + a*d1 and c2 + b*d2; returns the
// ray parameters (a, b), which are the depths up to the ray norms.
bool midpoint_depths(const Eigen::Vector3d& d1, const Eigen::Vector3d& c2,
                     const Eigen::Vector3d& d2, double& a, double& b) {
  // minimize |a d1 - (c2 + b d2)|^2
  Eigen::Matrix2d m;
  m << d1.dot(d1), -d1.dot(d2), -d1.dot(d2), d2.dot(d2);
  const Eigen::Vector2d rhs(d1.dot(c2), -d2.dot(c2));
  const double det = m.determinant();
  if (std::abs(det) < 1e-14 * m.norm() * m.norm()) return false;
  const Eigen::Vector2d s = m.inverse() * rhs;
  a = s(0);
  b = s(1);
  return true;
}

std::size_t count_in_front(const Eigen::Matrix3d& R, const Eigen::Vector3d& t,
                           const std::vector<Eigen::Vector3d>& r1,
                           const std::vector<Eigen::Vector3d>& r2) {
  // Second camera: X2 = R X1 + t, centre c2 = -R^T t, ray direction R^T r2.
  const Eigen::Vector3d c2 = -R.transpose() * t;
  std::size_t n = 0;
  for (std::size_t i = 0; i < r1.size(); ++i) {
    double a = 0, b = 0;
    if (!midpoint_depths(r1[i], c2, R.transpose() * r2[i], a, b)) continue;
    const Eigen::Vector3d X1 = 0.5 * (a * r1[i] + c2 + b * R.transpose() * r2[i]);
    const Eigen::Vector3d X2 = R * X1 + t;
    if (X1.z() > 0 && X2.z() > 0) ++n;
  }
  return n;
}

}  // namespace

RelativePose recover_pose(const Eigen::Matrix3d& E, const MatchSet& ms, const Eigen::Matrix3d& K1,
                          const Eigen::Matrix3d& K2, std::span<const std::uint8_t> use) {
  if (!use.empty() && use.size() != ms.size()) {
    throw ShapeError("recover_pose: selection size differs from match count");
  }
  const Eigen::Matrix3d K1_inv = K1.inverse(), K2_inv = K2.inverse();
  std::vector<Eigen::Vector3d> r1, r2;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    if (!use.empty() && !use[i]) continue;
    r1.push_back(K1_inv * ms.matches[i].x.homogeneous());
    r2.push_back(K2_inv * ms.matches[i].x_prime.homogeneous());
  }
  if (r1.empty()) throw DataError("recover_pose: no matches");

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(E, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d U = svd.matrixU(), V = svd.matrixV();
  if (U.determinant() < 0) U = -U;
  if (V.determinant() < 0) V = -V;
  Eigen::Matrix3d W;
  W << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  const Eigen::Matrix3d Ra = U * W * V.transpose();
  const Eigen::Matrix3d Rb = U * W.transpose() * V.transpose();
  const Eigen::Vector3d tu = U.col(2).normalized();

  const std::array<std::pair<Eigen::Matrix3d, Eigen::Vector3d>, 4> candidates{
      {{Ra, tu}, {Ra, -tu}, {Rb, tu}, {Rb, -tu}}};
  std::array<std::size_t, 4> counts{};
  for (std::size_t k = 0; k < 4; ++k) {
    counts[k] = count_in_front(candidates[k].first, candidates[k].second, r1, r2);
  }
  std::array<std::size_t, 4> order{0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return counts[a] > counts[b]; });
  if (counts[order[0]] == counts[order[1]]) {
    throw NumericalError("recover_pose: degenerate cheirality (no unique decomposition)");
  }
  return {candidates[order[0]].first, candidates[order[0]].second, counts[order[0]]};
}

PoseError pose_errors(const Eigen::Matrix3d& R_est, const Eigen::Vector3d& t_est,
                      const Eigen::Matrix3d& R_gt, const Eigen::Vector3d& t_gt) {
  constexpr double kDeg = 180.0 / std::numbers::pi;
  const double c = std::clamp(0.5 * ((R_est.transpose() * R_gt).trace() - 1.0), -1.0, 1.0);
  const double d = std::clamp(std::abs(t_est.normalized().dot(t_gt.normalized())), 0.0, 1.0);
  return {std::acos(c) * kDeg, std::acos(d) * kDeg};
}

}  // namespace dgc::pose
