#pragma once

#include <vector>

#include "dgc/geometry/correspondence.hpp"
#include "dgc/model/network.hpp"

namespace dgc::model {

// Ground truth at every pyramid level (coarsest first), as N x 2 x H x W map
// and N x 1 x H x W mask tensors without history.
struct GtPyramid {
  std::vector<Tensor> maps;
  std::vector<Tensor> masks;
};

// Coarser levels come from repeated downsample_ground_truth calls.
GtPyramid make_gt_pyramid(const geometry::GroundTruth& finest, const PyramidConfig& config);

// Concatenates single-item pyramids along the batch dimension.
GtPyramid stack_gt(const std::vector<const GtPyramid*>& items);
// Batch concatenation of constant tensors (no gradient).
Tensor stack_batch(const std::vector<const Tensor*>& items);

// sum_l alpha_l * masked mean L1 error at level l.
Tensor correspondence_loss(const NetworkOutput& out, const GtPyramid& gt,
                           const PyramidConfig& config);

// Mean BCE with logits against the finest mask.
Tensor matchability_loss(const Tensor& logits, const Tensor& gt_mask);

struct LossTerms {
  Tensor correspondence;
  Tensor matchability;  // undefined when beta == 0
  Tensor total;
};

// L = L_c + beta * L_m. Throws UsageError if beta < 0, or beta > 0 without a
// matchability head.
LossTerms total_loss(const NetworkOutput& out, const GtPyramid& gt, const PyramidConfig& config,
                     double beta = 1.0);

}  // namespace dgc::model
