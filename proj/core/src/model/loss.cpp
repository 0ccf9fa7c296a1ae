#include "dgc/model/loss.hpp"

#include <algorithm>

#include "dgc/error.hpp"

namespace dgc::model {

GtPyramid make_gt_pyramid(const geometry::GroundTruth& finest, const PyramidConfig& config) {
  if (finest.map.width != config.base_resolution || finest.map.height != config.base_resolution) {
    throw ShapeError("ground truth resolution differs from the model resolution");
  }
  GtPyramid p;
  p.maps.resize(static_cast<std::size_t>(config.levels));
  p.masks.resize(static_cast<std::size_t>(config.levels));
  geometry::GroundTruth level = finest;
  for (int l = config.levels - 1; l >= 0; --l) {
    if (l < config.levels - 1) {
      const int r = config.level_resolution(l);
      level = geometry::downsample_ground_truth(level, r, r);
    }
    p.maps[static_cast<std::size_t>(l)] = geometry::map_to_tensor(level.map);
    p.masks[static_cast<std::size_t>(l)] = geometry::mask_to_tensor(level.mask);
  }
  return p;
}

Tensor stack_batch(const std::vector<const Tensor*>& items) {
  if (items.empty()) throw ShapeError("stack_batch: empty list");
  Shape shape = items.front()->shape();
  std::vector<float> data;
  data.reserve(static_cast<std::size_t>(items.front()->numel()) * items.size());
  for (const Tensor* t : items) {
    Shape s = t->shape();
    if (s.size() != shape.size() || !std::equal(s.begin() + 1, s.end(), shape.begin() + 1)) {
      throw ShapeError("stack_batch: shape mismatch");
    }
    data.insert(data.end(), t->data().begin(), t->data().end());
  }
  shape[0] = 0;
  for (const Tensor* t : items) shape[0] += t->dim(0);
  return Tensor::from_data(shape, std::move(data));
}

GtPyramid stack_gt(const std::vector<const GtPyramid*>& items) {
  if (items.empty()) throw ShapeError("stack_gt: empty list");
  GtPyramid out;
  for (std::size_t l = 0; l < items.front()->maps.size(); ++l) {
    std::vector<const Tensor*> maps, masks;
    for (const auto* g : items) {
      maps.push_back(&g->maps[l]);
      masks.push_back(&g->masks[l]);
    }
    out.maps.push_back(stack_batch(maps));
    out.masks.push_back(stack_batch(masks));
  }
  return out;
}

Tensor correspondence_loss(const NetworkOutput& out, const GtPyramid& gt,
                           const PyramidConfig& config) {
  const auto L = static_cast<std::size_t>(config.levels);
  if (out.maps.size() != L || gt.maps.size() != L || gt.masks.size() != L) {
    throw ShapeError("correspondence_loss: level count mismatch");
  }
  Tensor total;
  for (std::size_t l = 0; l < L; ++l) {
    if (out.maps[l].shape() != gt.maps[l].shape()) {
      throw ShapeError("correspondence_loss: resolution mismatch at level " + std::to_string(l));
    }
    Tensor term = ops::scale(ops::masked_l1_loss(out.maps[l], gt.maps[l], gt.masks[l]),
                             static_cast<float>(config.alpha[l]));
    total = total.defined() ? ops::add(total, term) : term;
  }
  return total;
}

Tensor matchability_loss(const Tensor& logits, const Tensor& gt_mask) {
  return ops::bce_with_logits(logits, gt_mask);
}

LossTerms total_loss(const NetworkOutput& out, const GtPyramid& gt, const PyramidConfig& config,
                     double beta) {
  if (beta < 0.0) throw UsageError("total_loss: beta must be non-negative");
  LossTerms t;
  t.correspondence = correspondence_loss(out, gt, config);
  t.total = t.correspondence;
  if (beta > 0.0) {
    if (!out.matchability_logits.defined()) {
      throw UsageError("total_loss: beta > 0 requires the matchability head");
    }
    t.matchability = matchability_loss(out.matchability_logits, gt.masks.back());
    t.total = ops::add(t.correspondence, ops::scale(t.matchability, static_cast<float>(beta)));
  }
  return t;
}

}  // namespace dgc::model
