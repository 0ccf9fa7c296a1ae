#include <cmath>

#include <Eigen/Dense>

#include "dgc/error.hpp"
#include "tps_internal.hpp"

namespace dgc::geometry {

namespace detail {

double tps_kernel(double r) { return r > 0.0 ? r * r * std::log(r) : 0.0; }

Point tps_apply(const TpsParams& p, const Point& x) {
  Point out = p.affine.row(0).transpose() + p.affine.row(1).transpose() * x.x() +
              p.affine.row(2).transpose() * x.y();
  for (Eigen::Index i = 0; i < p.control.rows(); ++i) {
    const double r = (x - p.control.row(i).transpose()).norm();
    out += p.kernel_weights.row(i).transpose() * tps_kernel(r);
  }
  return out;
}

Eigen::Matrix2d tps_jacobian(const TpsParams& p, const Point& x) {
  Eigen::Matrix2d j;
  j.col(0) = p.affine.row(1).transpose();
  j.col(1) = p.affine.row(2).transpose();
  for (Eigen::Index i = 0; i < p.control.rows(); ++i) {
    const Point d = x - p.control.row(i).transpose();
    const double r = d.norm();
    if (r <= 0.0) continue;
    // dU/dp = (2 log r + 1) (p - c)
    const Point grad = (2.0 * std::log(r) + 1.0) * d;
    j += p.kernel_weights.row(i).transpose() * grad.transpose();
  }
  return j;
}

Point tps_invert(const TpsParams& p, const Point& q) {
  // Fixed-point start, then damped Newton on f(x) - q.
  Point x = q - (tps_apply(p, q) - q);
  for (int it = 0; it < 100; ++it) {
    const Point residual = tps_apply(p, x) - q;
    if (residual.norm() < 1e-13) break;
    const Eigen::Matrix2d j = tps_jacobian(p, x);
    if (std::abs(j.determinant()) < 1e-12) throw NumericalError("TPS inverse: singular Jacobian");
    Point step = j.partialPivLu().solve(residual);
    double lambda = 1.0;
    const double r0 = residual.norm();
    while (lambda > 1e-4 && (tps_apply(p, x - lambda * step) - q).norm() >= r0) lambda *= 0.5;
    x -= lambda * step;
  }
  return x;
}

}  // namespace detail

TpsParams fit_tps(std::span<const Point> src, std::span<const Point> dst, double reg) {
  if (src.size() != dst.size()) throw UsageError("fit_tps: control point count mismatch");
  const auto n = static_cast<Eigen::Index>(src.size());
  if (n < 3) throw UsageError("fit_tps: need at least 3 control points");
  if (reg < 0) throw UsageError("fit_tps: regularization must be non-negative");

  Eigen::MatrixXd p(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) p.row(i) << 1.0, src[i].x(), src[i].y();
  Eigen::FullPivLU<Eigen::MatrixXd> plu(p);
  plu.setThreshold(1e-9);
  if (plu.rank() < 3) throw NumericalError("fit_tps: control points are collinear");

  Eigen::MatrixXd system = Eigen::MatrixXd::Zero(n + 3, n + 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      system(i, j) = detail::tps_kernel((src[i] - src[j]).norm());
    }
    system(i, i) += reg;
  }
  system.block(0, n, n, 3) = p;
  system.block(n, 0, 3, n) = p.transpose();

  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n + 3, 2);
  for (Eigen::Index i = 0; i < n; ++i) rhs.row(i) = dst[i].transpose();

  Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
  if (!lu.isInvertible()) throw NumericalError("fit_tps: singular TPS system");
  const Eigen::MatrixXd sol = lu.solve(rhs);

  TpsParams out;
  out.control.resize(n, 2);
  out.targets.resize(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.control.row(i) = src[i].transpose();
    out.targets.row(i) = dst[i].transpose();
  }
  out.kernel_weights = sol.topRows(n);
  out.affine = sol.bottomRows(3);
  return out;
}

}  // namespace dgc::geometry
