#pragma once

#include "dgc/geometry/render.hpp"
#include "dgc/pose/camera.hpp"

namespace dgc::geometry {

// Convex polyhedral scene {X : n_i . X >= d_i} seen from the first camera
// (at the origin, looking down +z). Its visible surface is a "roof" whose
// faces give non-coplanar structure.
struct ConvexScene {
  struct Face {
    Eigen::Vector3d normal;
    double offset;
  };
  std::vector<Face> faces;
  double texture_scale = 1.0;  // texture pixels per world unit
};

struct RayHit {
  bool hit = false;
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
  int face = -1;
};

RayHit intersect(const ConvexScene& scene, const Eigen::Vector3d& origin,
                 const Eigen::Vector3d& direction);

// Pair rendered from two calibrated views of a textured convex scene. The
// correspondence map lives on the target (first camera) grid and points into
// the source (second camera) image; the mask also requires the surface point
// to face the second camera.
struct PosePair {
  TrainingPair pair;
  pose::CameraModel target_camera;  // K only; R = I, t = 0
  pose::CameraModel source_camera;  // K and the relative pose (R, t)
};

// strength in (0, 0.4] scales the rotation (up to strength * 15 degrees) and
// the baseline (strength * 1.5 world units at a scene depth of ~3).
PosePair render_pose_pair(const Image& texture, Rng& rng, int resolution, double strength);

}  // namespace dgc::geometry
