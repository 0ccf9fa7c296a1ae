#include "dgc/geometry/transform.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "dgc/error.hpp"
#include "tps_internal.hpp"

namespace dgc::geometry {

namespace {

constexpr double kInfinityEps = 1e-12;
constexpr double kSingularDet = 1e-10;

Eigen::Matrix3d to_matrix(const GeometricTransform& t) {
  if (t.kind() == TransformKind::Affine) {
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
    m.topRows<2>() = t.affine().m;
    return m;
  }
  if (t.kind() == TransformKind::Homography) return t.homography().h;
  throw UsageError("operation requires an affine or homography transform");
}

}  // namespace

std::string to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::Affine: return "affine";
    case TransformKind::Homography: return "homo";
    case TransformKind::Tps: return "tps";
  }
  return "unknown";
}

TransformKind parse_transform_kind(const std::string& name) {
  if (name == "affine" || name == "aff") return TransformKind::Affine;
  if (name == "homo" || name == "homography") return TransformKind::Homography;
  if (name == "tps") return TransformKind::Tps;
  throw UsageError("unknown transform kind '" + name + "' (expected affine, tps or homo)");
}

GeometricTransform::GeometricTransform(HomographyParams p) {
  if (std::abs(p.h.determinant()) <= kSingularDet) {
    throw NumericalError("homography is singular");
  }
  if (std::abs(p.h(2, 2)) > kInfinityEps) p.h /= p.h(2, 2);
  params_ = std::move(p);
}

GeometricTransform GeometricTransform::identity(TransformKind kind) {
  switch (kind) {
    case TransformKind::Affine: return GeometricTransform(AffineParams{});
    case TransformKind::Homography: return GeometricTransform(HomographyParams{});
    case TransformKind::Tps: {
      TpsParams p;
      p.control.resize(9, 2);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) p.control.row(3 * i + j) << j - 1.0, i - 1.0;
      p.targets = p.control;
      p.kernel_weights = Eigen::MatrixX2d::Zero(9, 2);
      p.affine << 0, 0, 1, 0, 0, 1;
      return GeometricTransform(std::move(p));
    }
  }
  return {};
}

TransformKind GeometricTransform::kind() const {
  return static_cast<TransformKind>(params_.index());
}

std::vector<double> GeometricTransform::flat_params() const {
  std::vector<double> out;
  auto push = [&out](const auto& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  };
  switch (kind()) {
    case TransformKind::Affine: push(affine().m); break;
    case TransformKind::Homography: push(homography().h); break;
    case TransformKind::Tps:
      push(tps().control);
      push(tps().targets);
      push(tps().kernel_weights);
      push(tps().affine);
      break;
  }
  return out;
}

Point apply_transform(const GeometricTransform& t, const Point& p) {
  switch (t.kind()) {
    case TransformKind::Affine: return t.affine().m * p.homogeneous();
    case TransformKind::Homography: {
      const Eigen::Vector3d q = t.homography().h * p.homogeneous();
      if (std::abs(q.z()) < kInfinityEps) throw NumericalError("homography maps point to infinity");
      return q.hnormalized();
    }
    case TransformKind::Tps: return detail::tps_apply(t.tps(), p);
  }
  return p;
}

GeometricTransform inverse(const GeometricTransform& t) {
  if (t.kind() == TransformKind::Affine) {
    const Eigen::Matrix2d a = t.affine().m.leftCols<2>();
    if (std::abs(a.determinant()) <= kSingularDet) throw NumericalError("affine map is singular");
    AffineParams inv;
    inv.m.leftCols<2>() = a.inverse();
    inv.m.col(2) = -inv.m.leftCols<2>() * t.affine().m.col(2);
    return GeometricTransform(inv);
  }
  if (t.kind() == TransformKind::Homography) {
    return GeometricTransform(HomographyParams{t.homography().h.inverse()});
  }
  throw UsageError("thin-plate splines have no closed-form inverse; use invert_point");
}

Point invert_point(const GeometricTransform& t, const Point& q) {
  if (t.kind() == TransformKind::Tps) return detail::tps_invert(t.tps(), q);
  return apply_transform(inverse(t), q);
}

GeometricTransform compose(const GeometricTransform& outer, const GeometricTransform& inner) {
  const Eigen::Matrix3d m = to_matrix(outer) * to_matrix(inner);
  if (outer.kind() == TransformKind::Affine && inner.kind() == TransformKind::Affine) {
    return GeometricTransform(AffineParams{m.topRows<2>()});
  }
  return GeometricTransform(HomographyParams{m});
}

HomographyParams dlt_homography(std::span<const Point> src, std::span<const Point> dst) {
  if (src.size() != dst.size() || src.size() < 4) {
    throw UsageError("dlt_homography: need >= 4 matching point pairs");
  }
  // Hartley conditioning on both point sets.
  auto conditioner = [](std::span<const Point> pts) {
    Point mean = Point::Zero();
    for (const auto& p : pts) mean += p;
    mean /= static_cast<double>(pts.size());
    double dist = 0.0;
    for (const auto& p : pts) dist += (p - mean).norm();
    dist /= static_cast<double>(pts.size());
    const double s = dist > 0 ? std::sqrt(2.0) / dist : 1.0;
    Eigen::Matrix3d T;
    T << s, 0, -s * mean.x(), 0, s, -s * mean.y(), 0, 0, 1;
    return T;
  };
  const Eigen::Matrix3d ts = conditioner(src), td = conditioner(dst);
  Eigen::MatrixXd a(2 * src.size(), 9);
  for (std::size_t i = 0; i < src.size(); ++i) {
    const Eigen::Vector3d p = ts * src[i].homogeneous();
    const Eigen::Vector3d q = td * dst[i].homogeneous();
    a.row(2 * i) << 0, 0, 0, -q.z() * p.transpose(), q.y() * p.transpose();
    a.row(2 * i + 1) << q.z() * p.transpose(), 0, 0, 0, -q.x() * p.transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  Eigen::Matrix3d hm = td.inverse() * hn * ts;
  if (std::abs(hm(2, 2)) < kInfinityEps) throw NumericalError("dlt_homography: h33 vanishes");
  hm /= hm(2, 2);
  if (std::abs(hm.determinant()) <= kSingularDet) throw NumericalError("dlt_homography: singular");
  return HomographyParams{hm};
}

Eigen::Matrix2d jacobian(const GeometricTransform& t, const Point& p) {
  switch (t.kind()) {
    case TransformKind::Affine: return t.affine().m.leftCols<2>();
    case TransformKind::Homography: {
      const Eigen::Matrix3d& h = t.homography().h;
      const Eigen::Vector3d q = h * p.homogeneous();
      Eigen::Matrix2d j;
      for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
          j(r, c) = (h(r, c) * q.z() - q(r) * h(2, c)) / (q.z() * q.z());
        }
      }
      return j;
    }
    case TransformKind::Tps: return detail::tps_jacobian(t.tps(), p);
  }
  return Eigen::Matrix2d::Identity();
}

}  // namespace dgc::geometry
