#include "dgc/geometry/pose_scene.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

namespace dgc::geometry {

namespace {

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

constexpr double kSceneDepth = 3.0;

ConvexScene sample_scene(Rng& rng, int resolution) {
  ConvexScene scene;
  const double phase = uniform(rng, 0, std::numbers::pi / 2);
  for (int k = 0; k < 4; ++k) {
    // z >= d + g . (x, y)  <=>  (-g, 1) . X >= d
    const double angle = phase + k * std::numbers::pi / 2 + uniform(rng, -0.3, 0.3);
    const double slope = uniform(rng, 0.25, 0.6);
    const Eigen::Vector2d g(slope * std::cos(angle), slope * std::sin(angle));
    const double d = kSceneDepth + uniform(rng, -0.15, 0.15);
    Eigen::Vector3d n(-g.x(), -g.y(), 1.0);
    const double norm = n.norm();
    scene.faces.push_back({n / norm, d / norm});
  }
  scene.texture_scale = resolution / 3.0;
  return scene;
}

Eigen::Vector3d pixel_ray(const Eigen::Matrix3d& K_inv, int row, int col) {
  return K_inv * Eigen::Vector3d(col, row, 1.0);
}

void shade(const Image& texture, const ConvexScene& scene, const RayHit& hit, float rgb[3]) {
  if (!hit.hit) {
    rgb[0] = rgb[1] = rgb[2] = 0.0f;
    return;
  }
  const double cx = 0.5 * (texture.width - 1), cy = 0.5 * (texture.height - 1);
  sample_bilinear(texture, cx + scene.texture_scale * hit.point.x(),
                  cy + scene.texture_scale * hit.point.y(), rgb);
}

}  // namespace

RayHit intersect(const ConvexScene& scene, const Eigen::Vector3d& origin,
                 const Eigen::Vector3d& direction) {
  double enter = 0.0;
  double leave = std::numeric_limits<double>::infinity();
  int face = -1;
  for (std::size_t i = 0; i < scene.faces.size(); ++i) {
    const auto& f = scene.faces[i];
    const double start = f.normal.dot(origin) - f.offset;  // >= 0 inside
    const double rate = f.normal.dot(direction);
    if (std::abs(rate) < 1e-15) {
      if (start < 0) return {};
      continue;
    }
    const double s = -start / rate;
    if (rate > 0) {
      if (s > enter) {
        enter = s;
        face = static_cast<int>(i);
      }
    } else {
      leave = std::min(leave, s);
    }
  }
  if (face < 0 || enter >= leave) return {};
  return {true, origin + enter * direction, face};
}

PosePair render_pose_pair(const Image& texture, Rng& rng, int resolution, double strength) {
  const ConvexScene scene = sample_scene(rng, resolution);

  const Eigen::Vector3d axis(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
  const double angle = uniform(rng, 0.3, 1.0) * strength * 15.0 * std::numbers::pi / 180.0;
  Eigen::Vector3d dir(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -0.3, 0.3));
  if (dir.norm() < 0.2) dir = Eigen::Vector3d(1, 0, 0);
  const double baseline = uniform(rng, 0.5, 1.0) * strength * 1.5;

  PosePair out;
  const Eigen::Matrix3d K = pose::default_intrinsics(resolution, resolution);
  out.target_camera.K = K;
  out.source_camera.K = K;
  out.source_camera.R = pose::axis_angle(axis, angle);
  out.source_camera.t = baseline * dir.normalized();

  const Eigen::Matrix3d K_inv = K.inverse();
  const Eigen::Matrix3d& R = out.source_camera.R;
  const Eigen::Vector3d& t = out.source_camera.t;
  const Eigen::Vector3d source_center = -R.transpose() * t;

  TrainingPair& pair = out.pair;
  pair.transform = GeometricTransform::identity();
  pair.target_image = Image(resolution, resolution);
  pair.source_image = Image(resolution, resolution);
  pair.gt_map = CorrespondenceMap(resolution, resolution);
  pair.gt_mask = MatchabilityMask(resolution, resolution);

  for (int i = 0; i < resolution; ++i) {
    for (int j = 0; j < resolution; ++j) {
      float rgb[3];
      const RayHit hit = intersect(scene, Eigen::Vector3d::Zero(), pixel_ray(K_inv, i, j));
      shade(texture, scene, hit, rgb);
      for (int c = 0; c < 3; ++c) pair.target_image.at(i, j, c) = rgb[c];

      const RayHit src_hit =
          intersect(scene, source_center, R.transpose() * pixel_ray(K_inv, i, j));
      shade(texture, scene, src_hit, rgb);
      for (int c = 0; c < 3; ++c) pair.source_image.at(i, j, c) = rgb[c];

      if (!hit.hit) {
        pair.gt_map.set(i, j, 3.0, 3.0);  // far outside the frame
        continue;
      }
      const Eigen::Vector3d x2 = R * hit.point + t;
      bool valid = x2.z() > 1e-6;
      double u = 3.0, v = 3.0;
      if (valid) {
        const Eigen::Vector3d p = K * (x2 / x2.z());
        u = pixel_to_normalized(p.x(), resolution);
        v = pixel_to_normalized(p.y(), resolution);
        const auto& face = scene.faces[static_cast<std::size_t>(hit.face)];
        valid = face.normal.dot(source_center) < face.offset;  // faces the second camera
      }
      pair.gt_map.set(i, j, u, v);
      valid = valid && u >= -1.0 && u <= 1.0 && v >= -1.0 && v <= 1.0;
      pair.gt_mask.valid[static_cast<std::size_t>(i) * resolution + j] = valid ? 1 : 0;
    }
  }
  return out;
}

}  // namespace dgc::geometry
