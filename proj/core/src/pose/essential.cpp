#include <cmath>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "dgc/pose/pose.hpp"

namespace dgc::pose {

Eigen::Matrix3d intrinsics(double fx, double fy, double cx, double cy) {
  Eigen::Matrix3d K;
  K << fx, 0, cx, 0, fy, cy, 0, 0, 1;
  return K;
}

Eigen::Matrix3d default_intrinsics(int width, int height) {
  return intrinsics(width, width, 0.5 * (width - 1), 0.5 * (height - 1));
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d s;
  s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return s;
}

Eigen::Matrix3d essential_from_pose(const Eigen::Matrix3d& R, const Eigen::Vector3d& t) {
  return skew(t) * R;
}

Eigen::Matrix3d fundamental_from_essential(const Eigen::Matrix3d& E, const Eigen::Matrix3d& K1,
                                           const Eigen::Matrix3d& K2) {
  return K2.inverse().transpose() * E * K1.inverse();
}

Eigen::Matrix3d axis_angle(const Eigen::Vector3d& axis, double angle_rad) {
  if (axis.norm() == 0.0) return Eigen::Matrix3d::Identity();
  return Eigen::AngleAxisd(angle_rad, axis.normalized()).toRotationMatrix();
}

namespace {

// Similarity moving the centroid to the origin with mean distance sqrt(2).
Eigen::Matrix3d hartley(std::span<const Eigen::Vector2d> pts) {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  double dist = 0.0;
  for (const auto& p : pts) dist += (p - mean).norm();
  dist /= static_cast<double>(pts.size());
  const double s = dist > 0 ? std::sqrt(2.0) / dist : 1.0;
  Eigen::Matrix3d T;
  T << s, 0, -s * mean.x(), 0, s, -s * mean.y(), 0, 0, 1;
  return T;
}

}  // namespace

std::optional<Eigen::Matrix3d> essential_eight_point(std::span<const Eigen::Vector2d> x1,
                                                     std::span<const Eigen::Vector2d> x2) {
  if (x1.size() != x2.size() || x1.size() < kMinMatches) return std::nullopt;
  const Eigen::Matrix3d t1 = hartley(x1), t2 = hartley(x2);
  const auto n = static_cast<Eigen::Index>(x1.size());
  Eigen::MatrixXd a(std::max<Eigen::Index>(n, 9), 9);
  a.setZero();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector3d p = t1 * x1[i].homogeneous();
    const Eigen::Vector3d q = t2 * x2[i].homogeneous();
    a.row(i) << q.x() * p.transpose(), q.y() * p.transpose(), q.z() * p.transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv(0) <= 0.0 || sv(7) / sv(0) < 1e-10) return std::nullopt;
  const Eigen::VectorXd e = svd.matrixV().col(8);
  Eigen::Matrix3d en;
  en << e(0), e(1), e(2), e(3), e(4), e(5), e(6), e(7), e(8);
  const Eigen::Matrix3d E = t2.transpose() * en * t1;

  Eigen::JacobiSVD<Eigen::Matrix3d> esvd(E, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double s = 0.5 * (esvd.singularValues()(0) + esvd.singularValues()(1));
  if (s <= 0.0) return std::nullopt;
  Eigen::Matrix3d proj =
      esvd.matrixU() * Eigen::Vector3d(1.0, 1.0, 0.0).asDiagonal() * esvd.matrixV().transpose();
  return proj;  // unit singular values; E is defined up to scale
}

}  // namespace dgc::pose
