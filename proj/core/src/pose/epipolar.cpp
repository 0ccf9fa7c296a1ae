#include <algorithm>
#include <cmath>
#include <limits>

#include "dgc/pose/pose.hpp"

namespace dgc::pose {

namespace {

// Squared distance from p to the line l = (a, b, c); +inf if a = b = 0.
double line_distance_sq(const Eigen::Vector3d& l, const Eigen::Vector2d& p) {
  const double n2 = l.x() * l.x() + l.y() * l.y();
  if (n2 <= 0.0) return std::numeric_limits<double>::infinity();
  const double r = l.x() * p.x() + l.y() * p.y() + l.z();
  return r * r / n2;
}

}  // namespace

double symmetric_epipolar_distance(const Eigen::Matrix3d& F, const Eigen::Vector2d& x,
                                   const Eigen::Vector2d& x_prime) {
  const Eigen::Vector3d l2 = F * x.homogeneous();
  const Eigen::Vector3d l1 = F.transpose() * x_prime.homogeneous();
  return std::sqrt(0.5 * (line_distance_sq(l2, x_prime) + line_distance_sq(l1, x)));
}

EpipolarSummary symmetric_epipolar_error(const MatchSet& ms, const Eigen::Matrix3d& F) {
  EpipolarSummary out;
  out.distances.reserve(ms.size());
  std::vector<double> finite;
  for (const auto& m : ms.matches) {
    const double d = symmetric_epipolar_distance(F, m.x, m.x_prime);
    out.distances.push_back(d);
    if (std::isfinite(d)) finite.push_back(d);
  }
  out.finite = finite.size();
  if (!finite.empty()) {
    std::sort(finite.begin(), finite.end());
    const std::size_t mid = finite.size() / 2;
    out.median = finite.size() % 2 ? finite[mid] : 0.5 * (finite[mid - 1] + finite[mid]);
  } else {
    out.median = std::numeric_limits<double>::infinity();
  }
  return out;
}

std::vector<HistogramBin> cumulative_histogram(std::span<const double> values,
                                               std::span<const double> thresholds) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<HistogramBin> out;
  for (double t : thresholds) {
    const auto count = std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
    out.push_back({t, sorted.empty() ? 0.0 : static_cast<double>(count) / sorted.size()});
  }
  return out;
}

}  // namespace dgc::pose
