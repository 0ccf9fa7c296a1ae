#include "dgc/model/network.hpp"

#include "arch.hpp"
#include "dgc/error.hpp"

namespace dgc::model {

namespace {

Tensor apply_conv(const arch::ConvSpec& spec, const Tensor& x, ModelState& s, bool training,
                  bool relu_after = true) {
  const ops::Conv2dOptions opt{spec.stride, spec.dilation, spec.dilation};
  if (!spec.batchnorm) {
    return ops::conv2d(x, s.param(spec.name + ".w"), s.param(spec.name + ".bias"), opt);
  }
  Tensor y = ops::conv2d(x, s.param(spec.name + ".w"), Tensor(), opt);
  const std::string bn = spec.name + ".bn";
  y = ops::batchnorm(y, s.param(bn + ".g"), s.param(bn + ".b"), s.stats(bn), training);
  return relu_after ? ops::relu(y) : y;
}

void check_input(const Tensor& img, const PyramidConfig& c) {
  if (img.rank() != 4 || img.dim(1) != 3 || img.dim(2) != c.base_resolution ||
      img.dim(3) != c.base_resolution) {
    throw ShapeError("network: expected N x 3 x " + std::to_string(c.base_resolution) + " x " +
                     std::to_string(c.base_resolution) + " input, got " + shape_str(img.shape()));
  }
}

Tensor correlate(const Tensor& target_feat, const Tensor& source_feat, const PyramidConfig& c) {
  Tensor corr = c.correlation == Correlation::Global
                    ? ops::global_correlation(target_feat, source_feat)
                    : ops::local_correlation(target_feat, source_feat, c.radius);
  return c.l2norm_correlation ? ops::l2_normalize_channels(corr) : corr;
}

}  // namespace

std::vector<Tensor> build_feature_pyramid(const Tensor& image, ModelState& state, bool training) {
  const PyramidConfig& c = state.config();
  c.validate();
  check_input(image, c);
  std::vector<Tensor> pyramid(static_cast<std::size_t>(c.levels));
  Tensor x = image;
  for (int l = c.levels - 1; l >= 0; --l) {
    for (const auto& spec : arch::encoder_level(c, l)) x = apply_conv(spec, x, state, training);
    pyramid[static_cast<std::size_t>(l)] = c.l2norm_correlation ? ops::l2_normalize_channels(x) : x;
  }
  return pyramid;
}

NetworkOutput forward(const Tensor& source, const Tensor& target, ModelState& state,
                      bool training) {
  const PyramidConfig& c = state.config();
  check_input(target, c);
  if (source.shape() != target.shape()) throw ShapeError("network: source/target shape mismatch");
  const auto fs = build_feature_pyramid(source, state, training);
  const auto ft = build_feature_pyramid(target, state, training);
  const std::int64_t n = source.dim(0);

  NetworkOutput out;
  Tensor penultimate;
  for (int l = 0; l < c.levels; ++l) {
    const auto li = static_cast<std::size_t>(l);
    Tensor x;
    if (l == 0) {
      x = correlate(ft[0], fs[0], c);
    } else {
      const Tensor up = ops::upsample_bilinear_2x(out.maps.back());
      const Tensor warped = ops::grid_sample(fs[li], up);
      x = c.correlation == Correlation::Global
              ? ops::concat_channels({up, warped, ft[li]})
              : ops::concat_channels({up, correlate(ft[li], warped, c)});
    }
    const auto specs = arch::decoder_level(c, l);
    for (std::size_t k = 0; k + 1 < specs.size(); ++k) x = apply_conv(specs[k], x, state, training);
    penultimate = x;
    Tensor m = apply_conv(specs.back(), x, state, training);
    if (c.parametrization == Parametrization::Flow) {
      const int r = c.level_resolution(l);
      m = ops::add(ops::identity_grid(n, r, r), m);
    }
    out.maps.push_back(m);
  }
  if (c.use_matchability) {
    Tensor h = penultimate;
    for (const auto& spec : arch::matchability_head(c)) h = apply_conv(spec, h, state, training);
    out.matchability_logits = h;
  }
  return out;
}

}  // namespace dgc::model
