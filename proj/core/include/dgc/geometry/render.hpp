#pragma once

#include "dgc/error.hpp"
#include "dgc/geometry/correspondence.hpp"
#include "dgc/geometry/image.hpp"
#include "dgc/geometry/transform.hpp"

namespace dgc::geometry {

// Source/target images with ground truth such that sampling the source at
// gt_map reproduces the target wherever gt_mask holds.
struct TrainingPair {
  Image source_image;
  Image target_image;
  CorrespondenceMap gt_map;
  MatchabilityMask gt_mask;
  GeometricTransform transform;
};

class PairRejected : public DataError {
 public:
  using DataError::DataError;
};

inline constexpr double kMaxInvalidFraction = 0.8;

// target = central resolution x resolution crop of base; source(y) = base
// sampled at t^-1(y). Throws PairRejected when more than 80% of the mask is
// invalid.
TrainingPair render_pair(const Image& base, const GeometricTransform& t, int resolution);

// Target-frame reconstruction grid_sample(source, gt_map) in image space.
Image warp_by_map(const Image& source, const CorrespondenceMap& map);

}  // namespace dgc::geometry
