#pragma once

#include "dgc/geometry/transform.hpp"

namespace dgc::geometry::detail {

double tps_kernel(double r);
Point tps_apply(const TpsParams& p, const Point& x);
Eigen::Matrix2d tps_jacobian(const TpsParams& p, const Point& x);
Point tps_invert(const TpsParams& p, const Point& q);

}  // namespace dgc::geometry::detail
