#pragma once

#include <Eigen/Core>

namespace dgc::pose {

/// Pinhole camera with zero skew. For a relative pose, X2 = R * X1 + t maps
/// points from the first camera frame into the second.
struct CameraModel {
  Eigen::Matrix3d K = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
};

Eigen::Matrix3d intrinsics(double fx, double fy, double cx, double cy);

// Focal length equal to the image width, principal point at the image centre.
Eigen::Matrix3d default_intrinsics(int width, int height);

Eigen::Matrix3d skew(const Eigen::Vector3d& v);

// E = [t]x R
Eigen::Matrix3d essential_from_pose(const Eigen::Matrix3d& R, const Eigen::Vector3d& t);

// F = K2^-T E K1^-1
Eigen::Matrix3d fundamental_from_essential(const Eigen::Matrix3d& E, const Eigen::Matrix3d& K1,
                                           const Eigen::Matrix3d& K2);

// Rotation by `angle_rad` about `axis` (need not be normalized).
Eigen::Matrix3d axis_angle(const Eigen::Vector3d& axis, double angle_rad);

}  // namespace dgc::pose
