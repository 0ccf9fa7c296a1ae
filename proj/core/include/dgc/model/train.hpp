#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "dgc/geometry/render.hpp"
#include "dgc/model/loss.hpp"
#include "dgc/model/optimizer.hpp"

namespace dgc::model {

struct Sample {
  Tensor source;  // 1 x 3 x H x W
  Tensor target;
  GtPyramid gt;
};

Sample make_sample(const geometry::TrainingPair& pair, const PyramidConfig& config);

struct TrainConfig {
  int epochs = 30;
  int batch = 8;
  std::uint64_t seed = 0;
  bool freeze_encoder = false;
  double beta = 1.0;     // matchability weight; ignored without the head
  int epoch_offset = 0;  // numbering continues across resumed runs
};

struct LossRecord {
  int epoch = 0;
  std::int64_t step = 0;
  double correspondence = 0.0;
  double matchability = 0.0;
  double total = 0.0;
};

using EpochCallback = std::function<void(int epoch, ModelState& state)>;

// Mini-batch Adam over `data` for cfg.epochs epochs with a seeded shuffle
// per epoch. Throws NumericalError if the loss becomes non-finite.
std::vector<LossRecord> train(const std::vector<Sample>& data, ModelState& state, Adam& optimizer,
                              const TrainConfig& cfg, const EpochCallback& on_epoch = {});

// Eval-mode forward without graph recording.
NetworkOutput infer(ModelState& state, const Tensor& source, const Tensor& target);

}  // namespace dgc::model
