#pragma once

#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace dgc::geometry {

// Points are in normalized image coordinates: [-1, 1] spans the image from
// the centre of the first pixel to the centre of the last (align-corners).
using Point = Eigen::Vector2d;
using Rng = std::mt19937_64;

enum class TransformKind { Affine, Homography, Tps };

std::string to_string(TransformKind kind);
// Accepts "affine", "homo"/"homography" and "tps"; throws UsageError otherwise.
TransformKind parse_transform_kind(const std::string& name);

struct AffineParams {
  Eigen::Matrix<double, 2, 3> m = Eigen::Matrix<double, 2, 3>::Identity();
};

struct HomographyParams {
  Eigen::Matrix3d h = Eigen::Matrix3d::Identity();  // h(2, 2) == 1
};

// f(p) = A^T [1, px, py] + sum_i w_i U(|p - c_i|), U(r) = r^2 log r.
struct TpsParams {
  Eigen::MatrixX2d control;         // source control points c_i
  Eigen::MatrixX2d targets;         // f(c_i) when fitted without regularization
  Eigen::MatrixX2d kernel_weights;  // w_i
  Eigen::Matrix<double, 3, 2> affine = Eigen::Matrix<double, 3, 2>::Zero();
};

class GeometricTransform {
 public:
  GeometricTransform() : params_(AffineParams{}) {}
  explicit GeometricTransform(AffineParams p) : params_(std::move(p)) {}
  explicit GeometricTransform(HomographyParams p);
  explicit GeometricTransform(TpsParams p) : params_(std::move(p)) {}

  static GeometricTransform identity(TransformKind kind = TransformKind::Affine);

  TransformKind kind() const;
  const AffineParams& affine() const { return std::get<AffineParams>(params_); }
  const HomographyParams& homography() const { return std::get<HomographyParams>(params_); }
  const TpsParams& tps() const { return std::get<TpsParams>(params_); }

  // Flattened parameters, for logging and determinism checks.
  std::vector<double> flat_params() const;

 private:
  std::variant<AffineParams, HomographyParams, TpsParams> params_;
};

// Maps a point; throws NumericalError for a homography point at infinity.
Point apply_transform(const GeometricTransform& t, const Point& p);

// Exact inverse transform (affine and homography only).
GeometricTransform inverse(const GeometricTransform& t);

// Solves t(p) = q for p. Closed form for affine/homography, Newton
// iteration on the forward map for TPS.
Point invert_point(const GeometricTransform& t, const Point& q);

// outer o inner, for affine/homography transforms.
GeometricTransform compose(const GeometricTransform& outer, const GeometricTransform& inner);

// Direct linear transform from >= 4 correspondences, normalized so h33 = 1.
HomographyParams dlt_homography(std::span<const Point> src, std::span<const Point> dst);

// Thin-plate spline through the control pairs. With reg == 0 it interpolates;
// collinear controls raise NumericalError.
TpsParams fit_tps(std::span<const Point> src, std::span<const Point> dst, double reg = 0.0);

// 2x2 Jacobian of the forward map at p.
Eigen::Matrix2d jacobian(const GeometricTransform& t, const Point& p);

// Random transform whose magnitude is controlled by strength in [0, 0.4];
// strength 0 yields the exact identity of the requested kind.
GeometricTransform sample_transform(TransformKind kind, Rng& rng, double strength);

}  // namespace dgc::geometry
