#pragma once

#include <vector>

#include "dgc/model/state.hpp"

namespace dgc::model {

struct NetworkOutput {
  std::vector<Tensor> maps;    // N x 2 x H_l x W_l, coarsest first
  Tensor matchability_logits;  // N x 1 x H x W, undefined without the head
};

// Encoder features, coarsest first; L2-normalized per location unless
// l2norm_correlation is off.
std::vector<Tensor> build_feature_pyramid(const Tensor& image, ModelState& state, bool training);

// Correspondence maps live on the target grid and point into the source
// image: grid_sample(source, maps.back()) approximates the target.
NetworkOutput forward(const Tensor& source, const Tensor& target, ModelState& state,
                      bool training);

}  // namespace dgc::model
