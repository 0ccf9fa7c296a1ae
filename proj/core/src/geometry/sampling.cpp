#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "dgc/error.hpp"
#include "dgc/geometry/transform.hpp"

namespace dgc::geometry {

namespace {

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Rejects transforms that fold or collapse the image region.
bool well_conditioned(const GeometricTransform& t) {
  for (int i = 0; i <= 10; ++i) {
    for (int j = 0; j <= 10; ++j) {
      const Point p(-1.0 + 0.2 * j, -1.0 + 0.2 * i);
      if (t.kind() == TransformKind::Homography) {
        const double w = t.homography().h.row(2).dot(p.homogeneous());
        if (w < 0.1) return false;
      }
      if (jacobian(t, p).determinant() < 0.05) return false;
    }
  }
  return true;
}

GeometricTransform draw(TransformKind kind, Rng& rng, double s) {
  switch (kind) {
    case TransformKind::Affine: {
      const double theta = uniform(rng, -s * std::numbers::pi / 4, s * std::numbers::pi / 4);
      const double scale = uniform(rng, 1.0 - s, 1.0 + s);
      const double shear = uniform(rng, -s / 2, s / 2);
      const double tx = uniform(rng, -s, s);
      const double ty = uniform(rng, -s, s);
      Eigen::Matrix2d rot;
      rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
      Eigen::Matrix2d stretch;
      stretch << scale, shear, 0.0, scale;
      AffineParams a;
      a.m.leftCols<2>() = rot * stretch;
      a.m.col(2) << tx, ty;
      return GeometricTransform(a);
    }
    case TransformKind::Homography: {
      const Point corners[4] = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
      Point moved[4];
      for (int k = 0; k < 4; ++k) {
        const double dx = uniform(rng, -s, s);
        const double dy = uniform(rng, -s, s);
        moved[k] = corners[k] + Point(dx, dy);
      }
      return GeometricTransform(dlt_homography(corners, moved));
    }
    case TransformKind::Tps: {
      std::vector<Point> src, dst;
      for (int i = -1; i <= 1; ++i) {
        for (int j = -1; j <= 1; ++j) {
          src.emplace_back(j, i);
          const double dx = uniform(rng, -s, s);
          const double dy = uniform(rng, -s, s);
          dst.emplace_back(j + dx, i + dy);
        }
      }
      return GeometricTransform(fit_tps(src, dst));
    }
  }
  return {};
}

}  // namespace

GeometricTransform sample_transform(TransformKind kind, Rng& rng, double strength) {
  if (!(strength >= 0.0 && strength <= 0.4)) {
    throw UsageError("sample_transform: strength must lie in [0, 0.4]");
  }
  if (strength == 0.0) return GeometricTransform::identity(kind);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    try {
      auto t = draw(kind, rng, strength);
      if (well_conditioned(t)) return t;
    } catch (const NumericalError&) {
      // degenerate draw, resample
    }
  }
  throw NumericalError("sample_transform: no well-conditioned draw after 1000 attempts");
}

}  // namespace dgc::geometry
