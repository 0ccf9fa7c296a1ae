#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "dgc/error.hpp"
#include "dgc/geometry/dataset.hpp"
#include "dgc/model/checkpoint.hpp"
#include "dgc/model/loss.hpp"
#include "dgc/model/network.hpp"
#include "dgc/model/train.hpp"

namespace dgc::model {
namespace {

Tensor random_image(int res, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  std::vector<float> v(static_cast<std::size_t>(3 * res * res));
  for (auto& x : v) x = u(rng);
  return Tensor::from_data({1, 3, res, res}, std::move(v));
}

// Reduced widths keep the tests fast; the layout matches the desk config.
PyramidConfig small_config(int levels = 3, int res = 16) {
  auto c = PyramidConfig::desk(levels, res);
  for (auto& ch : c.channels_per_level) ch = std::max(4, ch / 4);
  for (auto& level : c.decoder_channels)
    for (auto& w : level) w = std::max(4, w / 8);
  c.matchability_channels = {8, 8, 4, 1};
  return c;
}

bool same_values(const Tensor& a, const Tensor& b) {
  return a.shape() == b.shape() && std::equal(a.data().begin(), a.data().end(), b.data().begin());
}

TEST(Config, DeskDefaults) {
  const auto c = PyramidConfig::desk();
  EXPECT_EQ(c.levels, 4);
  EXPECT_EQ(c.base_resolution, 64);
  EXPECT_EQ(c.channels_per_level, (std::vector<int>{96, 64, 32, 16}));
  EXPECT_EQ(c.decoder_channels[0], (std::vector<int>{128, 128, 96, 64, 32}));
  EXPECT_EQ(c.dilations_per_level[3], (std::vector<int>{1, 2, 4, 4, 1}));
  EXPECT_EQ(c.dilations_per_level[2], (std::vector<int>{1, 1, 1, 1, 1}));
  EXPECT_EQ(c.alpha, std::vector<double>(4, 1.0));
  EXPECT_EQ(c.matchability_channels, (std::vector<int>{32, 32, 16, 1}));
  for (int l = 0; l < 4; ++l) EXPECT_EQ(c.level_resolution(l), 8 << l);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, ValidationRejectsInconsistentSettings) {
  auto c = PyramidConfig::desk(4, 60);
  EXPECT_THROW(c.validate(), UsageError);
  c = PyramidConfig::desk();
  c.alpha.pop_back();
  EXPECT_THROW(c.validate(), UsageError);
  c = PyramidConfig::desk();
  c.alpha[1] = -0.5;
  EXPECT_THROW(c.validate(), UsageError);
}

TEST(Config, KeyValueRoundTrip) {
  auto c = small_config();
  c.correlation = Correlation::Local;
  c.radius = 2;
  c.parametrization = Parametrization::Flow;
  c.use_matchability = true;
  c.alpha = {0.5, 1.0, 2.0};
  std::map<std::string, std::string> kv;
  for (const auto& [k, v] : c.to_key_values()) kv[k] = v;
  EXPECT_EQ(PyramidConfig::from_key_values(kv), c);
}

TEST(FeaturePyramid, DeskShapesAndUnitNorms) {
  const auto cfg = PyramidConfig::desk();
  auto state = init_state(cfg, 1);
  const auto pyr = build_feature_pyramid(random_image(64, 2), state, false);
  ASSERT_EQ(pyr.size(), 4u);
  for (int l = 0; l < 4; ++l) {
    const auto& f = pyr[static_cast<std::size_t>(l)];
    EXPECT_EQ(f.shape(), (Shape{1, cfg.channels_per_level[static_cast<std::size_t>(l)], 8 << l, 8 << l}));
    for (std::int64_t i = 0; i < f.dim(2); ++i)
      for (std::int64_t j = 0; j < f.dim(3); ++j) {
        double s = 0.0;
        for (std::int64_t c = 0; c < f.dim(1); ++c) s += f.at({0, c, i, j}) * f.at({0, c, i, j});
        EXPECT_NEAR(std::sqrt(s), 1.0, 1e-5);
      }
  }
}

TEST(FeaturePyramid, SharedWeightsGiveIdenticalFeatures) {
  auto state = init_state(small_config(), 3);
  const Tensor img = random_image(16, 4);
  const auto a = build_feature_pyramid(img, state, false);
  const auto b = build_feature_pyramid(img, state, false);
  for (std::size_t l = 0; l < a.size(); ++l) EXPECT_TRUE(same_values(a[l], b[l]));
  // The encoder is stored once: there are no per-branch parameter copies.
  for (const auto& n : state.param_names()) {
    EXPECT_EQ(n.find("source"), std::string::npos);
    EXPECT_EQ(n.find("target"), std::string::npos);
  }
}

TEST(FeaturePyramid, RejectsIndivisibleResolution) {
  auto cfg = small_config(3, 16);
  auto state = init_state(cfg, 1);
  EXPECT_THROW(build_feature_pyramid(random_image(18, 1), state, false), Error);
}

class ForwardVariants : public ::testing::TestWithParam<int> {};

TEST_P(ForwardVariants, ShapesAndFiniteness) {
  auto cfg = small_config();
  switch (GetParam()) {
    case 1: cfg.correlation = Correlation::Local; cfg.radius = 2; break;
    case 2: cfg.parametrization = Parametrization::Flow; break;
    case 3: cfg.use_matchability = true; break;
    case 4: cfg.l2norm_correlation = false; break;
    default: break;
  }
  auto state = init_state(cfg, 5);
  const auto out = forward(random_image(16, 6), random_image(16, 7), state, false);
  ASSERT_EQ(out.maps.size(), 3u);
  for (int l = 0; l < 3; ++l) {
    const int r = cfg.level_resolution(l);
    EXPECT_EQ(out.maps[static_cast<std::size_t>(l)].shape(), (Shape{1, 2, r, r}));
    for (float v : out.maps[static_cast<std::size_t>(l)].data()) EXPECT_TRUE(std::isfinite(v));
  }
  EXPECT_EQ(out.matchability_logits.defined(), cfg.use_matchability);
  if (cfg.use_matchability) EXPECT_EQ(out.matchability_logits.shape(), (Shape{1, 1, 16, 16}));
}

INSTANTIATE_TEST_SUITE_P(Model, ForwardVariants, ::testing::Range(0, 5));

TEST(Forward, FlowAndMapParametrizationsShareShapes) {
  auto a = small_config(), b = small_config();
  b.parametrization = Parametrization::Flow;
  auto sa = init_state(a, 8), sb = init_state(b, 8);
  const Tensor s = random_image(16, 9), t = random_image(16, 10);
  const auto oa = forward(s, t, sa, false), ob = forward(s, t, sb, false);
  for (std::size_t l = 0; l < oa.maps.size(); ++l) EXPECT_EQ(oa.maps[l].shape(), ob.maps[l].shape());
  EXPECT_EQ(sa.parameter_count(), sb.parameter_count());
}

TEST(Forward, IdentityUpsampleThenWarpPreservesFeatures) {
  auto state = init_state(small_config(), 11);
  const auto pyr = build_feature_pyramid(random_image(16, 12), state, false);
  for (std::size_t l = 1; l < pyr.size(); ++l) {
    const auto r = pyr[l - 1].dim(2);
    const Tensor up = ops::upsample_bilinear_2x(ops::identity_grid(1, r, r));
    const Tensor warped = ops::grid_sample(pyr[l], up);
    for (std::int64_t i = 0; i < warped.numel(); ++i) {
      EXPECT_NEAR(warped.data()[static_cast<std::size_t>(i)], pyr[l].data()[static_cast<std::size_t>(i)], 1e-5);
    }
  }
}

TEST(Forward, PostNormalizationKeepsCorrelationArgmax) {
  std::mt19937_64 rng(13);
  std::normal_distribution<float> n01;
  std::vector<float> a(8 * 25), b(8 * 25);
  for (auto& x : a) x = n01(rng);
  for (auto& x : b) x = n01(rng);
  const Tensor fa = ops::l2_normalize_channels(Tensor::from_data({1, 8, 5, 5}, a));
  const Tensor fb = ops::l2_normalize_channels(Tensor::from_data({1, 8, 5, 5}, b));
  const Tensor vol = ops::global_correlation(fa, fb);
  const Tensor post = ops::l2_normalize_channels(vol);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      std::int64_t ka = 0, kb = 0;
      for (std::int64_t k = 1; k < 25; ++k) {
        if (vol.at({0, k, i, j}) > vol.at({0, ka, i, j})) ka = k;
        if (post.at({0, k, i, j}) > post.at({0, kb, i, j})) kb = k;
      }
      EXPECT_EQ(ka, kb);
    }
}

// Single-level prediction/ground truth helpers for the closed-form losses.
struct OneLevel {
  PyramidConfig cfg;
  NetworkOutput out;
  GtPyramid gt;
};

OneLevel one_level(float du, float dv, float mask_value) {
  OneLevel o;
  o.cfg = PyramidConfig::desk(1, 4);
  const Tensor gt = ops::identity_grid(1, 4, 4);
  std::vector<float> est(gt.data().begin(), gt.data().end());
  for (std::size_t i = 0; i < 16; ++i) {
    est[i] += du;
    est[16 + i] += dv;
  }
  o.out.maps = {Tensor::from_data({1, 2, 4, 4}, est, true)};
  o.gt.maps = {gt};
  o.gt.masks = {Tensor::full({1, 1, 4, 4}, mask_value)};
  return o;
}

TEST(Loss, ExactPredictionGivesZero) {
  auto o = one_level(0.0f, 0.0f, 1.0f);
  EXPECT_EQ(correspondence_loss(o.out, o.gt, o.cfg).item(), 0.0f);
}

TEST(Loss, UniformErrorClosedForm) {
  auto o = one_level(0.1f, 0.1f, 1.0f);
  EXPECT_NEAR(correspondence_loss(o.out, o.gt, o.cfg).item(), 0.2, 1e-6);
  o.cfg.alpha = {2.5};
  EXPECT_NEAR(correspondence_loss(o.out, o.gt, o.cfg).item(), 0.5, 1e-6);
}

TEST(Loss, EmptyMaskGivesZero) {
  auto o = one_level(0.3f, -0.7f, 0.0f);
  EXPECT_EQ(correspondence_loss(o.out, o.gt, o.cfg).item(), 0.0f);
}

TEST(Loss, MaskedPixelsDoNotAffectLoss) {
  auto o = one_level(0.05f, -0.02f, 1.0f);
  std::vector<float> mask(16, 1.0f);
  for (std::size_t i = 0; i < 16; i += 3) mask[i] = 0.0f;
  o.gt.masks = {Tensor::from_data({1, 1, 4, 4}, mask)};
  const float before = correspondence_loss(o.out, o.gt, o.cfg).item();
  std::vector<float> est(o.out.maps[0].data().begin(), o.out.maps[0].data().end());
  for (std::size_t i = 0; i < 16; i += 3) {
    est[i] += 7.0f;
    est[16 + i] -= 3.0f;
  }
  o.out.maps = {Tensor::from_data({1, 2, 4, 4}, est)};
  EXPECT_EQ(correspondence_loss(o.out, o.gt, o.cfg).item(), before);
}

TEST(Loss, LevelsAreWeightedAndSummed) {
  PyramidConfig cfg = PyramidConfig::desk(2, 4);
  cfg.alpha = {0.5, 2.0};
  NetworkOutput out;
  GtPyramid gt;
  for (int r : {2, 4}) {
    const Tensor id = ops::identity_grid(1, r, r);
    std::vector<float> est(id.data().begin(), id.data().end());
    for (auto& v : est) v += r == 2 ? 0.2f : 0.05f;
    out.maps.push_back(Tensor::from_data({1, 2, r, r}, est));
    gt.maps.push_back(id);
    gt.masks.push_back(Tensor::full({1, 1, r, r}, 1.0f));
  }
  // 0.5 * 0.4 + 2.0 * 0.1
  EXPECT_NEAR(correspondence_loss(out, gt, cfg).item(), 0.4, 1e-6);
}

TEST(Loss, ZeroLogitsGiveLogTwo) {
  std::vector<float> mask(16);
  for (std::size_t i = 0; i < 16; ++i) mask[i] = (i % 3 == 0) ? 1.0f : 0.0f;
  const Tensor m = Tensor::from_data({1, 1, 4, 4}, mask);
  EXPECT_NEAR(matchability_loss(Tensor::zeros({1, 1, 4, 4}), m).item(), std::log(2.0), 1e-6);
}

TEST(Loss, SaturatedLogitsAreStable) {
  std::vector<float> mask(16), right(16), wrong(16);
  for (std::size_t i = 0; i < 16; ++i) {
    mask[i] = i % 2 ? 1.0f : 0.0f;
    right[i] = mask[i] > 0 ? 20.0f : -20.0f;
    wrong[i] = mask[i] > 0 ? -20.0f : 20.0f;
  }
  const Tensor m = Tensor::from_data({1, 1, 4, 4}, mask);
  EXPECT_LT(matchability_loss(Tensor::from_data({1, 1, 4, 4}, right), m).item(), 1e-6);
  const double per_pixel = 20.0 + std::log1p(std::exp(-20.0));
  EXPECT_NEAR(matchability_loss(Tensor::from_data({1, 1, 4, 4}, wrong), m).item(), per_pixel, 1e-5);
}

TEST(Loss, TotalIsExactSum) {
  auto cfg = small_config();
  cfg.use_matchability = true;
  auto state = init_state(cfg, 14);
  const auto out = forward(random_image(16, 15), random_image(16, 16), state, false);
  geometry::GroundTruth g{geometry::identity_map(16, 16), geometry::MatchabilityMask(16, 16, true)};
  g.mask.valid[3] = 0;
  const auto gt = make_gt_pyramid(g, cfg);
  const auto terms = total_loss(out, gt, cfg, 1.0);
  EXPECT_EQ(terms.total.item(), terms.correspondence.item() + terms.matchability.item());
  const auto c_only = total_loss(out, gt, cfg, 0.0);
  EXPECT_EQ(c_only.total.item(), correspondence_loss(out, gt, cfg).item());
  EXPECT_THROW(total_loss(out, gt, cfg, -1.0), UsageError);
  auto plain = small_config();
  auto plain_state = init_state(plain, 14);
  const auto plain_out = forward(random_image(16, 15), random_image(16, 16), plain_state, false);
  EXPECT_THROW(total_loss(plain_out, make_gt_pyramid(g, plain), plain, 1.0), UsageError);
}

TEST(GtPyramid, CoarseMasksAreConservative) {
  const auto cfg = small_config(3, 16);
  geometry::GroundTruth g{geometry::identity_map(16, 16), geometry::MatchabilityMask(16, 16, true)};
  g.mask.valid[0] = 0;
  const auto p = make_gt_pyramid(g, cfg);
  ASSERT_EQ(p.masks.size(), 3u);
  EXPECT_EQ(p.masks[2].shape(), (Shape{1, 1, 16, 16}));
  EXPECT_EQ(p.masks[0].shape(), (Shape{1, 1, 4, 4}));
  EXPECT_EQ(p.masks[1].at({0, 0, 0, 0}), 0.0f);
  EXPECT_EQ(p.masks[0].at({0, 0, 0, 0}), 0.0f);
  EXPECT_EQ(p.masks[0].at({0, 0, 0, 1}), 1.0f);
}

TEST(Adam, ZeroLearningRateLeavesStateUnchanged) {
  auto cfg = small_config();
  auto state = init_state(cfg, 17);
  const auto before = state.clone();
  std::vector<Sample> data;
  geometry::GroundTruth g{geometry::identity_map(16, 16), geometry::MatchabilityMask(16, 16, true)};
  data.push_back({random_image(16, 18), random_image(16, 19), make_gt_pyramid(g, cfg)});
  Adam opt({0.0});
  TrainConfig tc;
  tc.epochs = 1;
  tc.batch = 1;
  train(data, state, opt, tc);
  for (const auto& n : state.param_names()) EXPECT_TRUE(same_values(state.param(n), before.param(n))) << n;
  EXPECT_EQ(opt.steps(), 1);
}

TEST(Adam, FirstStepMovesEachWeightByLearningRate) {
  ModelState s(PyramidConfig::desk(1, 4));
  s.add_param("w", Tensor::from_data({3}, {1.0f, 2.0f, 3.0f}, true));
  Tensor w = s.param("w");
  backward(ops::sum(ops::scale(w, -2.0f)));
  Adam opt({0.01});
  opt.step(s);
  // Bias-corrected first step: m_hat / sqrt(v_hat) = sign(g).
  EXPECT_NEAR(w.data()[0], 1.01f, 1e-6);
  EXPECT_NEAR(w.data()[2], 3.01f, 1e-6);
}

std::vector<Sample> identity_samples(const PyramidConfig& cfg, int n, std::uint64_t seed) {
  geometry::DatasetSpec spec;
  spec.count = n;
  spec.resolution = cfg.base_resolution;
  spec.strength = 0.0;
  spec.seed = seed;
  std::vector<Sample> out;
  for (const auto& r : geometry::make_manifest(spec).pairs) {
    out.push_back(make_sample(geometry::generate_pair(r, cfg.base_resolution, 0.0).pair, cfg));
  }
  return out;
}

TEST(Train, FixedSeedIsBitwiseReproducible) {
  const auto cfg = small_config();
  const auto data = identity_samples(cfg, 6, 20);
  auto run = [&]() {
    auto state = init_state(cfg, 21);
    Adam opt;
    TrainConfig tc;
    tc.epochs = 2;
    tc.batch = 4;
    tc.seed = 22;
    const auto trace = train(data, state, opt, tc);
    return std::pair{std::move(state), trace};
  };
  const auto [a, ta] = run();
  const auto [b, tb] = run();
  for (const auto& n : a.param_names()) EXPECT_TRUE(same_values(a.param(n), b.param(n))) << n;
  ASSERT_EQ(ta.size(), tb.size());
  for (std::size_t i = 0; i < ta.size(); ++i) EXPECT_EQ(ta[i].total, tb[i].total);
  EXPECT_EQ(ta.front().epoch, 0);
  EXPECT_EQ(ta.back().epoch, 1);
}

TEST(Train, FrozenEncoderKeepsEncoderWeights) {
  const auto cfg = small_config();
  const auto data = identity_samples(cfg, 4, 23);
  auto state = init_state(cfg, 24);
  const auto before = state.clone();
  Adam opt;
  TrainConfig tc;
  tc.epochs = 1;
  tc.batch = 2;
  tc.freeze_encoder = true;
  train(data, state, opt, tc);
  bool decoder_moved = false;
  for (const auto& n : state.param_names()) {
    const bool same = same_values(state.param(n), before.param(n));
    if (is_encoder_param(n)) EXPECT_TRUE(same) << n;
    else decoder_moved = decoder_moved || !same;
  }
  EXPECT_TRUE(decoder_moved);
}

TEST(Train, LearnsIdentityOnIdenticalPairs) {
  const auto cfg = PyramidConfig::desk(2, 16);
  const auto data = identity_samples(cfg, 16, 25);
  auto state = init_state(cfg, 26);
  Adam opt({3e-3});
  TrainConfig tc;
  tc.epochs = 150;
  tc.batch = 8;
  const auto trace = train(data, state, opt, tc);
  const auto probe = identity_samples(cfg, 4, 99);
  double mean_l2 = 0.0;
  int count = 0;
  for (const auto& s : probe) {
    const auto out = infer(state, s.source, s.source);
    const Tensor id = ops::identity_grid(1, 16, 16);
    const auto& m = out.maps.back();
    for (std::int64_t p = 0; p < 256; ++p) {
      const double du = m.data()[static_cast<std::size_t>(p)] - id.data()[static_cast<std::size_t>(p)];
      const double dv = m.data()[static_cast<std::size_t>(256 + p)] - id.data()[static_cast<std::size_t>(256 + p)];
      mean_l2 += std::hypot(du, dv);
      ++count;
    }
  }
  EXPECT_LT(mean_l2 / count, 0.05);
  EXPECT_LT(trace.back().correspondence, trace.front().correspondence);
}

TEST(Train, RejectsEmptyDataset) {
  auto state = init_state(small_config(), 1);
  Adam opt;
  EXPECT_THROW(train({}, state, opt, TrainConfig{}), DataError);
}

TEST(Checkpoint, RoundTripRestoresEverything) {
  auto cfg = small_config();
  cfg.use_matchability = true;
  const auto data = identity_samples(cfg, 2, 27);
  auto state = init_state(cfg, 28);
  Adam opt({5e-4});
  TrainConfig tc;
  tc.epochs = 1;
  tc.batch = 2;
  train(data, state, opt, tc);
  const auto path = std::filesystem::path(::testing::TempDir()) / "dgc_model_roundtrip.ckpt";
  save_checkpoint(path, state, opt, 1);
  const auto ck = load_checkpoint(path);
  EXPECT_EQ(ck.state.config(), cfg);
  EXPECT_EQ(ck.epochs_done, 1);
  EXPECT_EQ(ck.optimizer.steps(), opt.steps());
  EXPECT_EQ(ck.optimizer.config().lr, 5e-4);
  EXPECT_EQ(ck.state.param_names(), state.param_names());
  for (const auto& n : state.param_names()) EXPECT_TRUE(same_values(ck.state.param(n), state.param(n))) << n;
  for (const auto& n : state.batchnorm_names()) {
    EXPECT_EQ(ck.state.stats(n).running_mean, state.stats(n).running_mean);
    EXPECT_EQ(ck.state.stats(n).running_var, state.stats(n).running_var);
  }
  EXPECT_EQ(ck.optimizer.first_moments(), opt.first_moments());
  EXPECT_EQ(ck.optimizer.second_moments(), opt.second_moments());
  EXPECT_THROW(load_checkpoint(path.string() + ".missing"), DataError);
}

}  // namespace
}  // namespace dgc::model
