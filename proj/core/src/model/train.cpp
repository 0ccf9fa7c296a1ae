#include "dgc/model/train.hpp"

#include <cmath>
#include <numeric>
#include <random>

#include "dgc/error.hpp"
#include "dgc/geometry/image.hpp"

namespace dgc::model {

Sample make_sample(const geometry::TrainingPair& pair, const PyramidConfig& config) {
  return {geometry::image_to_tensor(pair.source_image), geometry::image_to_tensor(pair.target_image),
          make_gt_pyramid({pair.gt_map, pair.gt_mask}, config)};
}

namespace {

std::uint64_t epoch_seed(std::uint64_t seed, int epoch) {
  return seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(epoch + 1));
}

}  // namespace

std::vector<LossRecord> train(const std::vector<Sample>& data, ModelState& state, Adam& optimizer,
                              const TrainConfig& cfg, const EpochCallback& on_epoch) {
  if (data.empty()) throw DataError("train: empty dataset");
  if (cfg.batch <= 0 || cfg.epochs < 0) throw UsageError("train: bad batch size or epoch count");
  const PyramidConfig& c = state.config();
  const double beta = c.use_matchability ? cfg.beta : 0.0;
  const bool train_encoder = !cfg.freeze_encoder;

  std::vector<LossRecord> trace;
  std::vector<std::size_t> order(data.size());
  for (int e = 0; e < cfg.epochs; ++e) {
    const int epoch = cfg.epoch_offset + e;
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(epoch_seed(cfg.seed, epoch));
    for (std::size_t i = order.size(); i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(order[i - 1], order[pick(rng)]);
    }
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
      std::vector<const Tensor*> src, tgt;
      std::vector<const GtPyramid*> gts;
      for (std::size_t k = start; k < end; ++k) {
        src.push_back(&data[order[k]].source);
        tgt.push_back(&data[order[k]].target);
        gts.push_back(&data[order[k]].gt);
      }
      const Tensor s = stack_batch(src), t = stack_batch(tgt);
      const GtPyramid gt = stack_gt(gts);

      for (auto p : state.parameters()) p.zero_grad();
      const NetworkOutput out = forward(s, t, state, true);
      const LossTerms loss = total_loss(out, gt, c, beta);
      const double total = loss.total.item();
      if (!std::isfinite(total)) throw NumericalError("train: loss diverged (non-finite)");
      backward(loss.total);
      optimizer.step(state, train_encoder);

      LossRecord rec;
      rec.epoch = epoch;
      rec.step = optimizer.steps();
      rec.correspondence = loss.correspondence.item();
      rec.matchability = loss.matchability.defined() ? loss.matchability.item() : 0.0;
      rec.total = total;
      trace.push_back(rec);
    }
    if (on_epoch) on_epoch(epoch, state);
  }
  return trace;
}

NetworkOutput infer(ModelState& state, const Tensor& source, const Tensor& target) {
  NoGradGuard guard;
  return forward(source, target, state, false);
}

}  // namespace dgc::model
