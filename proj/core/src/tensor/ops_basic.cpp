#include <algorithm>
#include <cmath>

#include "dgc/error.hpp"
#include "dgc/tensor/ops.hpp"

namespace dgc::ops {

using detail::make_result;

namespace {

void require_rank4(const Tensor& x, const char* op) {
  if (!x.defined() || x.rank() != 4) {
    throw ShapeError(std::string(op) + ": expected N x C x H x W tensor");
  }
}

}  // namespace

Tensor relu(const Tensor& x) {
  std::vector<float> out(x.data().begin(), x.data().end());
  for (auto& v : out) v = v > 0.0f ? v : 0.0f;
  return make_result("relu", x.shape(), std::move(out), {x}, [x](std::span<const float> g) mutable {
    if (!x.requires_grad()) return;
    float* gx = x.grad_accumulator();
    const float* in = x.data().data();
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += in[i] > 0.0f ? g[i] : 0.0f;
  });
}

Tensor sigmoid(const Tensor& x) {
  std::vector<float> out(x.data().size());
  auto in = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = in[i];
    out[i] = static_cast<float>(v >= 0 ? 1.0 / (1.0 + std::exp(-v))
                                       : std::exp(v) / (1.0 + std::exp(v)));
  }
  auto y = out;
  return make_result("sigmoid", x.shape(), std::move(out), {x},
                     [x, y = std::move(y)](std::span<const float> g) mutable {
                       if (!x.requires_grad()) return;
                       float* gx = x.grad_accumulator();
                       for (std::size_t i = 0; i < g.size(); ++i) {
                         gx[i] += g[i] * y[i] * (1.0f - y[i]);
                       }
                     });
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("add: shape mismatch " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  }
  std::vector<float> out(a.data().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  return make_result("add", a.shape(), std::move(out), {a, b},
                     [a, b](std::span<const float> g) mutable {
                       for (const Tensor* t : {&a, &b}) {
                         if (!t->requires_grad()) continue;
                         float* gt = t->grad_accumulator();
                         for (std::size_t i = 0; i < g.size(); ++i) gt[i] += g[i];
                       }
                     });
}

Tensor scale(const Tensor& x, float factor) {
  std::vector<float> out(x.data().begin(), x.data().end());
  for (auto& v : out) v *= factor;
  return make_result("scale", x.shape(), std::move(out), {x},
                     [x, factor](std::span<const float> g) mutable {
                       if (!x.requires_grad()) return;
                       float* gx = x.grad_accumulator();
                       for (std::size_t i = 0; i < g.size(); ++i) gx[i] += factor * g[i];
                     });
}

Tensor sum(const Tensor& x) {
  double acc = 0.0;
  for (float v : x.data()) acc += v;
  return make_result("sum", {1}, {static_cast<float>(acc)}, {x},
                     [x](std::span<const float> g) mutable {
                       if (!x.requires_grad()) return;
                       float* gx = x.grad_accumulator();
                       const auto n = static_cast<std::size_t>(x.numel());
                       for (std::size_t i = 0; i < n; ++i) gx[i] += g[0];
                     });
}

Tensor dot_constant(const Tensor& x, std::span<const float> weights) {
  if (static_cast<std::int64_t>(weights.size()) != x.numel()) {
    throw ShapeError("dot_constant: weight count does not match tensor size");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += static_cast<double>(x.data()[i]) * weights[i];
  }
  std::vector<float> w(weights.begin(), weights.end());
  return make_result("dot_constant", {1}, {static_cast<float>(acc)}, {x},
                     [x, w = std::move(w)](std::span<const float> g) mutable {
                       if (!x.requires_grad()) return;
                       float* gx = x.grad_accumulator();
                       for (std::size_t i = 0; i < w.size(); ++i) gx[i] += g[0] * w[i];
                     });
}

Tensor concat_channels(const std::vector<Tensor>& xs) {
  if (xs.empty()) throw ShapeError("concat_channels: empty input list");
  for (const auto& x : xs) require_rank4(x, "concat_channels");
  const auto n = xs[0].dim(0), h = xs[0].dim(2), w = xs[0].dim(3);
  std::int64_t channels = 0;
  for (const auto& x : xs) {
    if (x.dim(0) != n || x.dim(2) != h || x.dim(3) != w) {
      throw ShapeError("concat_channels: inputs disagree on N, H or W");
    }
    channels += x.dim(1);
  }
  const std::int64_t plane = h * w;
  std::vector<float> out(static_cast<std::size_t>(n * channels * plane));
  std::vector<std::int64_t> offsets;
  std::int64_t c0 = 0;
  for (const auto& x : xs) {
    offsets.push_back(c0);
    const auto c = x.dim(1);
    for (std::int64_t b = 0; b < n; ++b) {
      std::copy_n(x.data().begin() + b * c * plane, c * plane,
                  out.begin() + (b * channels + c0) * plane);
    }
    c0 += c;
  }
  return make_result(
      "concat_channels", {n, channels, h, w}, std::move(out), xs,
      [xs, offsets, n, channels, plane](std::span<const float> g) mutable {
        for (std::size_t k = 0; k < xs.size(); ++k) {
          if (!xs[k].requires_grad()) continue;
          float* gx = xs[k].grad_accumulator();
          const auto c = xs[k].dim(1);
          for (std::int64_t b = 0; b < n; ++b) {
            const float* src = g.data() + (b * channels + offsets[k]) * plane;
            float* dst = gx + b * c * plane;
            for (std::int64_t i = 0; i < c * plane; ++i) dst[i] += src[i];
          }
        }
      });
}

Tensor slice_channels(const Tensor& x, std::int64_t begin, std::int64_t count) {
  require_rank4(x, "slice_channels");
  const auto n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (begin < 0 || count < 0 || begin + count > c) {
    throw ShapeError("slice_channels: range out of bounds");
  }
  const std::int64_t plane = h * w;
  std::vector<float> out(static_cast<std::size_t>(n * count * plane));
  for (std::int64_t b = 0; b < n; ++b) {
    std::copy_n(x.data().begin() + (b * c + begin) * plane, count * plane,
                out.begin() + b * count * plane);
  }
  return make_result("slice_channels", {n, count, h, w}, std::move(out), {x},
                     [x, n, c, begin, count, plane](std::span<const float> g) mutable {
                       if (!x.requires_grad()) return;
                       float* gx = x.grad_accumulator();
                       for (std::int64_t b = 0; b < n; ++b) {
                         const float* src = g.data() + b * count * plane;
                         float* dst = gx + (b * c + begin) * plane;
                         for (std::int64_t i = 0; i < count * plane; ++i) dst[i] += src[i];
                       }
                     });
}

namespace {

// Source coordinate and bilinear weights of each output index for an
// align-corners resize from `in` samples to `out` samples.
struct Tap {
  std::int64_t i0, i1;
  double w0, w1;
};

std::vector<Tap> resize_taps(std::int64_t in, std::int64_t out) {
  std::vector<Tap> taps(static_cast<std::size_t>(out));
  for (std::int64_t o = 0; o < out; ++o) {
    const double pos = out > 1 ? static_cast<double>(o) * (in - 1) / (out - 1) : 0.0;
    auto i0 = static_cast<std::int64_t>(std::floor(pos));
    i0 = std::clamp<std::int64_t>(i0, 0, in - 1);
    const auto i1 = std::min(i0 + 1, in - 1);
    const double frac = pos - i0;
    taps[o] = {i0, i1, 1.0 - frac, frac};
  }
  return taps;
}

}  // namespace

Tensor upsample_bilinear_2x(const Tensor& x) {
  require_rank4(x, "upsample_bilinear_2x");
  const auto n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const auto oh = 2 * h, ow = 2 * w;
  auto ty = resize_taps(h, oh);
  auto tx = resize_taps(w, ow);
  std::vector<float> out(static_cast<std::size_t>(n * c * oh * ow));
  auto in = x.data();
  for (std::int64_t p = 0; p < n * c; ++p) {
    const float* src = in.data() + p * h * w;
    float* dst = out.data() + p * oh * ow;
    for (std::int64_t i = 0; i < oh; ++i) {
      const auto& a = ty[i];
      for (std::int64_t j = 0; j < ow; ++j) {
        const auto& b = tx[j];
        const double v = a.w0 * (b.w0 * src[a.i0 * w + b.i0] + b.w1 * src[a.i0 * w + b.i1]) +
                         a.w1 * (b.w0 * src[a.i1 * w + b.i0] + b.w1 * src[a.i1 * w + b.i1]);
        dst[i * ow + j] = static_cast<float>(v);
      }
    }
  }
  return make_result(
      "upsample_bilinear_2x", {n, c, oh, ow}, std::move(out), {x},
      [x, ty = std::move(ty), tx = std::move(tx), n, c, h, w, oh, ow](
          std::span<const float> g) mutable {
        if (!x.requires_grad()) return;
        float* gx = x.grad_accumulator();
        std::vector<double> acc(static_cast<std::size_t>(h * w));
        for (std::int64_t p = 0; p < n * c; ++p) {
          std::fill(acc.begin(), acc.end(), 0.0);
          const float* go = g.data() + p * oh * ow;
          for (std::int64_t i = 0; i < oh; ++i) {
            const auto& a = ty[i];
            for (std::int64_t j = 0; j < ow; ++j) {
              const auto& b = tx[j];
              const double v = go[i * ow + j];
              acc[a.i0 * w + b.i0] += a.w0 * b.w0 * v;
              acc[a.i0 * w + b.i1] += a.w0 * b.w1 * v;
              acc[a.i1 * w + b.i0] += a.w1 * b.w0 * v;
              acc[a.i1 * w + b.i1] += a.w1 * b.w1 * v;
            }
          }
          float* dst = gx + p * h * w;
          for (std::int64_t k = 0; k < h * w; ++k) dst[k] += static_cast<float>(acc[k]);
        }
      });
}

Tensor l2_normalize_channels(const Tensor& x, float eps) {
  require_rank4(x, "l2_normalize_channels");
  const auto n = x.dim(0), c = x.dim(1), plane = x.dim(2) * x.dim(3);
  auto in = x.data();
  std::vector<float> out(in.size());
  std::vector<double> norms(static_cast<std::size_t>(n * plane));
  for (std::int64_t b = 0; b < n; ++b) {
    for (std::int64_t p = 0; p < plane; ++p) {
      double ss = 0.0;
      for (std::int64_t k = 0; k < c; ++k) {
        const double v = in[(b * c + k) * plane + p];
        ss += v * v;
      }
      const double norm = std::max(std::sqrt(ss), static_cast<double>(eps));
      norms[b * plane + p] = std::sqrt(ss) >= eps ? norm : -norm;  // sign marks clamping
      for (std::int64_t k = 0; k < c; ++k) {
        const auto idx = (b * c + k) * plane + p;
        out[idx] = static_cast<float>(in[idx] / norm);
      }
    }
  }
  auto y = out;
  return make_result(
      "l2_normalize_channels", x.shape(), std::move(out), {x},
      [x, y = std::move(y), norms = std::move(norms), n, c, plane](
          std::span<const float> g) mutable {
        if (!x.requires_grad()) return;
        float* gx = x.grad_accumulator();
        for (std::int64_t b = 0; b < n; ++b) {
          for (std::int64_t p = 0; p < plane; ++p) {
            const double signed_norm = norms[b * plane + p];
            const double norm = std::abs(signed_norm);
            // Unclamped: dx = (g - y <y, g>) / norm. Clamped: dx = g / eps.
            double proj = 0.0;
            if (signed_norm > 0) {
              for (std::int64_t k = 0; k < c; ++k) {
                const auto idx = (b * c + k) * plane + p;
                proj += static_cast<double>(y[idx]) * g[idx];
              }
            }
            for (std::int64_t k = 0; k < c; ++k) {
              const auto idx = (b * c + k) * plane + p;
              gx[idx] += static_cast<float>((g[idx] - y[idx] * proj) / norm);
            }
          }
        }
      });
}

BatchNormStats BatchNormStats::identity(std::size_t channels) {
  return {std::vector<float>(channels, 0.0f), std::vector<float>(channels, 1.0f)};
}

Tensor batchnorm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                 BatchNormStats& stats, bool training, float eps, float momentum) {
  require_rank4(x, "batchnorm");
  if (!(eps > 0.0f)) throw UsageError("batchnorm: eps must be positive");
  const auto n = x.dim(0), c = x.dim(1), plane = x.dim(2) * x.dim(3);
  if (gamma.numel() != c || beta.numel() != c) {
    throw ShapeError("batchnorm: gamma/beta length must equal channel count");
  }
  if (static_cast<std::int64_t>(stats.running_mean.size()) != c ||
      static_cast<std::int64_t>(stats.running_var.size()) != c) {
    throw ShapeError("batchnorm: running statistics have wrong length");
  }
  const std::int64_t count = n * plane;
  auto in = x.data();
  std::vector<double> mean(c), inv_std(c);
  for (std::int64_t k = 0; k < c; ++k) {
    if (training) {
      double s = 0.0;
      for (std::int64_t b = 0; b < n; ++b) {
        const float* p = in.data() + (b * c + k) * plane;
        for (std::int64_t i = 0; i < plane; ++i) s += p[i];
      }
      const double m = s / count;
      double ss = 0.0;
      for (std::int64_t b = 0; b < n; ++b) {
        const float* p = in.data() + (b * c + k) * plane;
        for (std::int64_t i = 0; i < plane; ++i) ss += (p[i] - m) * (p[i] - m);
      }
      const double var = ss / count;
      mean[k] = m;
      inv_std[k] = 1.0 / std::sqrt(var + eps);
      const double unbiased = count > 1 ? ss / (count - 1) : var;
      stats.running_mean[k] =
          static_cast<float>((1.0 - momentum) * stats.running_mean[k] + momentum * m);
      stats.running_var[k] =
          static_cast<float>((1.0 - momentum) * stats.running_var[k] + momentum * unbiased);
    } else {
      mean[k] = stats.running_mean[k];
      inv_std[k] = 1.0 / std::sqrt(static_cast<double>(stats.running_var[k]) + eps);
    }
  }
  std::vector<float> out(in.size());
  std::vector<float> xhat(in.size());
  for (std::int64_t b = 0; b < n; ++b) {
    for (std::int64_t k = 0; k < c; ++k) {
      const auto base = (b * c + k) * plane;
      for (std::int64_t i = 0; i < plane; ++i) {
        const double h = (in[base + i] - mean[k]) * inv_std[k];
        xhat[base + i] = static_cast<float>(h);
        out[base + i] = static_cast<float>(gamma.data()[k] * h + beta.data()[k]);
      }
    }
  }
  return make_result(
      "batchnorm", x.shape(), std::move(out), {x, gamma, beta},
      [x, gamma, beta, xhat = std::move(xhat), inv_std = std::move(inv_std), training, n, c,
       plane, count](std::span<const float> g) mutable {
        std::vector<double> sum_g(c, 0.0), sum_gx(c, 0.0);
        for (std::int64_t b = 0; b < n; ++b) {
          for (std::int64_t k = 0; k < c; ++k) {
            const auto base = (b * c + k) * plane;
            for (std::int64_t i = 0; i < plane; ++i) {
              sum_g[k] += g[base + i];
              sum_gx[k] += static_cast<double>(g[base + i]) * xhat[base + i];
            }
          }
        }
        if (gamma.requires_grad()) {
          float* gg = gamma.grad_accumulator();
          for (std::int64_t k = 0; k < c; ++k) gg[k] += static_cast<float>(sum_gx[k]);
        }
        if (beta.requires_grad()) {
          float* gb = beta.grad_accumulator();
          for (std::int64_t k = 0; k < c; ++k) gb[k] += static_cast<float>(sum_g[k]);
        }
        if (!x.requires_grad()) return;
        float* gx = x.grad_accumulator();
        for (std::int64_t b = 0; b < n; ++b) {
          for (std::int64_t k = 0; k < c; ++k) {
            const auto base = (b * c + k) * plane;
            const double scale_k = gamma.data()[k] * inv_std[k];
            for (std::int64_t i = 0; i < plane; ++i) {
              double d = g[base + i];
              if (training) {
                d -= (sum_g[k] + xhat[base + i] * sum_gx[k]) / count;
              }
              gx[base + i] += static_cast<float>(scale_k * d);
            }
          }
        }
      });
}

}  // namespace dgc::ops
