#include <cmath>

#include "dgc/error.hpp"
#include "dgc/tensor/ops.hpp"

namespace dgc::ops {

Tensor masked_l1_loss(const Tensor& est, const Tensor& target, const Tensor& mask) {
  if (!est.defined() || est.rank() != 4 || est.shape() != target.shape()) {
    throw ShapeError("masked_l1_loss: est and target must share an N x C x H x W shape");
  }
  const auto n = est.dim(0), c = est.dim(1), plane = est.dim(2) * est.dim(3);
  if (!mask.defined() || mask.shape() != Shape{n, 1, est.dim(2), est.dim(3)}) {
    throw ShapeError("masked_l1_loss: mask must be N x 1 x H x W, got " +
                     (mask.defined() ? shape_str(mask.shape()) : std::string("undefined")));
  }
  auto e = est.data();
  auto t = target.data();
  auto m = mask.data();
  std::int64_t valid = 0;
  double acc = 0.0;
  for (std::int64_t b = 0; b < n; ++b) {
    for (std::int64_t p = 0; p < plane; ++p) {
      if (m[b * plane + p] == 0.0f) continue;
      ++valid;
      for (std::int64_t ch = 0; ch < c; ++ch) {
        const auto idx = (b * c + ch) * plane + p;
        acc += std::abs(static_cast<double>(e[idx]) - t[idx]);
      }
    }
  }
  const double loss = valid > 0 ? acc / static_cast<double>(valid) : 0.0;
  return detail::make_result(
      "masked_l1_loss", {1}, {static_cast<float>(loss)}, {est},
      [est, target, mask, n, c, plane, valid](std::span<const float> g) mutable {
        if (!est.requires_grad() || valid == 0) return;
        float* ge = est.grad_accumulator();
        auto e = est.data();
        auto t = target.data();
        auto m = mask.data();
        const double scale = g[0] / static_cast<double>(valid);
        for (std::int64_t b = 0; b < n; ++b) {
          for (std::int64_t p = 0; p < plane; ++p) {
            if (m[b * plane + p] == 0.0f) continue;
            for (std::int64_t ch = 0; ch < c; ++ch) {
              const auto idx = (b * c + ch) * plane + p;
              const float d = e[idx] - t[idx];
              if (d > 0.0f) {
                ge[idx] += static_cast<float>(scale);
              } else if (d < 0.0f) {
                ge[idx] -= static_cast<float>(scale);
              }
            }
          }
        }
      });
}

Tensor bce_with_logits(const Tensor& logits, const Tensor& target) {
  if (!logits.defined() || !target.defined() || logits.shape() != target.shape()) {
    throw ShapeError("bce_with_logits: logits and target shapes differ");
  }
  auto z = logits.data();
  auto y = target.data();
  const auto count = z.size();
  if (count == 0) throw ShapeError("bce_with_logits: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double x = z[i];
    // max(x, 0) - x y + log(1 + exp(-|x|))
    acc += std::max(x, 0.0) - x * y[i] + std::log1p(std::exp(-std::abs(x)));
  }
  const double loss = acc / static_cast<double>(count);
  return detail::make_result(
      "bce_with_logits", {1}, {static_cast<float>(loss)}, {logits},
      [logits, target, count](std::span<const float> g) mutable {
        if (!logits.requires_grad()) return;
        float* gz = logits.grad_accumulator();
        auto z = logits.data();
        auto y = target.data();
        const double scale = g[0] / static_cast<double>(count);
        for (std::size_t i = 0; i < count; ++i) {
          const double x = z[i];
          const double s = x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
          gz[i] += static_cast<float>(scale * (s - y[i]));
        }
      });
}

}  // namespace dgc::ops
