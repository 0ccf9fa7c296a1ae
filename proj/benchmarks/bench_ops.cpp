#include <benchmark/benchmark.h>

#include <random>

#include "dgc/model/train.hpp"
#include "dgc/tensor/ops.hpp"

namespace {

using namespace dgc;

Tensor random_tensor(const Shape& s, bool requires_grad = false, std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> n01;
  std::vector<float> v(static_cast<std::size_t>(shape_numel(s)));
  for (auto& x : v) x = n01(rng);
  return Tensor::from_data(s, std::move(v), requires_grad);
}

// args: batch, in channels, out channels, side
void BM_Conv2d(benchmark::State& state) {
  const auto n = state.range(0), c = state.range(1), o = state.range(2), h = state.range(3);
  const Tensor x = random_tensor({n, c, h, h});
  const Tensor w = random_tensor({o, c, 3, 3});
  for (auto _ : state) benchmark::DoNotOptimize(ops::conv2d(x, w, Tensor(), {1, 1, 1}));
  state.counters["MAC/s"] = benchmark::Counter(static_cast<double>(n * o * c * 9 * h * h),
                                               benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_Conv2d)->Args({8, 3, 16, 64})->Args({8, 34, 16, 64})->Args({8, 66, 32, 32})
    ->Unit(benchmark::kMillisecond);

void BM_Conv2dBackward(benchmark::State& state) {
  const auto n = state.range(0), c = state.range(1), o = state.range(2), h = state.range(3);
  const Tensor x = random_tensor({n, c, h, h}, true);
  const Tensor w = random_tensor({o, c, 3, 3}, true);
  for (auto _ : state) backward(ops::sum(ops::conv2d(x, w, Tensor(), {1, 1, 1})));
}
BENCHMARK(BM_Conv2dBackward)->Args({8, 34, 16, 64})->Args({8, 66, 32, 32})
    ->Unit(benchmark::kMillisecond);

// args: channels, side
void BM_GlobalCorrelation(benchmark::State& state) {
  const auto c = state.range(0), h = state.range(1);
  const Tensor a = ops::l2_normalize_channels(random_tensor({8, c, h, h}, false, 1));
  const Tensor b = ops::l2_normalize_channels(random_tensor({8, c, h, h}, false, 2));
  for (auto _ : state) benchmark::DoNotOptimize(ops::global_correlation(a, b));
}
BENCHMARK(BM_GlobalCorrelation)->Args({96, 8})->Args({64, 16})->Unit(benchmark::kMillisecond);

// args: channels, side, radius
void BM_LocalCorrelation(benchmark::State& state) {
  const auto c = state.range(0), h = state.range(1);
  const int r = static_cast<int>(state.range(2));
  const Tensor a = random_tensor({8, c, h, h}, false, 1);
  const Tensor b = random_tensor({8, c, h, h}, false, 2);
  for (auto _ : state) benchmark::DoNotOptimize(ops::local_correlation(a, b, r));
}
BENCHMARK(BM_LocalCorrelation)->Args({32, 32, 4})->Args({16, 64, 4})->Unit(benchmark::kMillisecond);

// args: channels, side
void BM_GridSample(benchmark::State& state) {
  const auto c = state.range(0), h = state.range(1);
  const Tensor x = random_tensor({8, c, h, h}, true);
  const Tensor id = ops::identity_grid(8, h, h);
  std::vector<float> g(id.data().begin(), id.data().end());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = 0.9f * g[i] + 0.01f * static_cast<float>(i % 7);
  const Tensor grid = Tensor::from_data({8, 2, h, h}, g, true);
  for (auto _ : state) backward(ops::sum(ops::grid_sample(x, grid)));
}
BENCHMARK(BM_GridSample)->Args({16, 64})->Args({64, 16})->Unit(benchmark::kMillisecond);

// One optimizer step of the desk network on a batch of 8 pairs; arg: side.
void BM_TrainStep(benchmark::State& state) {
  const int res = static_cast<int>(state.range(0));
  const int levels = res >= 64 ? 4 : 3;
  const auto cfg = model::PyramidConfig::desk(levels, res);
  std::vector<model::Sample> data;
  geometry::GroundTruth gt{geometry::identity_map(res, res), geometry::MatchabilityMask(res, res, true)};
  for (int k = 0; k < 8; ++k) {
    const Tensor img = random_tensor({1, 3, res, res}, false, 10 + static_cast<std::uint64_t>(k));
    data.push_back({img, img, model::make_gt_pyramid(gt, cfg)});
  }
  auto net = model::init_state(cfg, 1);
  model::Adam opt;
  model::TrainConfig tc;
  tc.epochs = 1;
  tc.batch = 8;
  for (auto _ : state) model::train(data, net, opt, tc);
}
BENCHMARK(BM_TrainStep)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Inference(benchmark::State& state) {
  const int res = static_cast<int>(state.range(0));
  const auto cfg = model::PyramidConfig::desk(res >= 64 ? 4 : 3, res);
  auto net = model::init_state(cfg, 1);
  const Tensor a = random_tensor({1, 3, res, res}, false, 1), b = random_tensor({1, 3, res, res}, false, 2);
  for (auto _ : state) benchmark::DoNotOptimize(model::infer(net, a, b));
}
BENCHMARK(BM_Inference)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
