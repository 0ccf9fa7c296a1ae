#include <algorithm>

#include <Eigen/Core>

#include "dgc/error.hpp"
#include "dgc/tensor/ops.hpp"

namespace dgc::ops {

namespace {

using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

struct ConvGeometry {
  std::int64_t n, c, h, w;
  std::int64_t o, k;
  std::int64_t oh, ow;
  int stride, padding, dilation;

  std::int64_t patch() const { return c * k * k; }
  std::int64_t out_plane() const { return oh * ow; }
};

// Output columns [lo, hi) read in-bounds input for kernel column offset dx.
void valid_range(const ConvGeometry& g, std::int64_t dx, std::int64_t& lo, std::int64_t& hi) {
  // ix = ox * stride + dx must lie in [0, w)
  lo = dx >= 0 ? 0 : (-dx + g.stride - 1) / g.stride;
  hi = dx >= g.w ? 0 : (g.w - 1 - dx) / g.stride + 1;
  lo = std::min(lo, g.ow);
  hi = std::clamp(hi, lo, g.ow);
}

// Unrolls one image (C x H x W) into a (C*k*k) x (OH*OW) column matrix.
void im2col(const float* img, const ConvGeometry& g, float* col) {
  for (std::int64_t ch = 0; ch < g.c; ++ch) {
    for (std::int64_t ky = 0; ky < g.k; ++ky) {
      for (std::int64_t kx = 0; kx < g.k; ++kx) {
        float* row = col + ((ch * g.k + ky) * g.k + kx) * g.out_plane();
        const std::int64_t dx = kx * g.dilation - g.padding;
        std::int64_t lo, hi;
        valid_range(g, dx, lo, hi);
        for (std::int64_t oy = 0; oy < g.oh; ++oy) {
          const std::int64_t iy = oy * g.stride - g.padding + ky * g.dilation;
          float* dst = row + oy * g.ow;
          if (iy < 0 || iy >= g.h) {
            std::fill_n(dst, g.ow, 0.0f);
            continue;
          }
          const float* src = img + (ch * g.h + iy) * g.w;
          std::fill_n(dst, lo, 0.0f);
          if (g.stride == 1) {
            if (hi > lo) std::copy(src + lo + dx, src + hi + dx, dst + lo);
          } else {
            for (std::int64_t ox = lo; ox < hi; ++ox) dst[ox] = src[ox * g.stride + dx];
          }
          std::fill(dst + hi, dst + g.ow, 0.0f);
        }
      }
    }
  }
}

void col2im_add(const float* col, const ConvGeometry& g, float* img) {
  for (std::int64_t ch = 0; ch < g.c; ++ch) {
    for (std::int64_t ky = 0; ky < g.k; ++ky) {
      for (std::int64_t kx = 0; kx < g.k; ++kx) {
        const float* row = col + ((ch * g.k + ky) * g.k + kx) * g.out_plane();
        const std::int64_t dx = kx * g.dilation - g.padding;
        std::int64_t lo, hi;
        valid_range(g, dx, lo, hi);
        for (std::int64_t oy = 0; oy < g.oh; ++oy) {
          const std::int64_t iy = oy * g.stride - g.padding + ky * g.dilation;
          if (iy < 0 || iy >= g.h) continue;
          float* dst = img + (ch * g.h + iy) * g.w;
          const float* src = row + oy * g.ow;
          for (std::int64_t ox = lo; ox < hi; ++ox) dst[ox * g.stride + dx] += src[ox];
        }
      }
    }
  }
}

// Per-thread scratch for one image's column matrix.
std::vector<float>& scratch(std::size_t size) {
  thread_local std::vector<float> buf;
  if (buf.size() < size) buf.resize(size);
  return buf;
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, Conv2dOptions opt) {
  if (!x.defined() || x.rank() != 4) throw ShapeError("conv2d: x must be N x C x H x W");
  if (!weight.defined() || weight.rank() != 4 || weight.dim(2) != weight.dim(3)) {
    throw ShapeError("conv2d: weight must be O x C x k x k");
  }
  if (weight.dim(1) != x.dim(1)) {
    throw ShapeError("conv2d: input has " + std::to_string(x.dim(1)) +
                     " channels, weight expects " + std::to_string(weight.dim(1)));
  }
  if (opt.stride < 1 || opt.dilation < 1 || opt.padding < 0) {
    throw UsageError("conv2d: stride and dilation must be >= 1, padding >= 0");
  }
  if (bias.defined() && bias.numel() != weight.dim(0)) {
    throw ShapeError("conv2d: bias length must equal output channels");
  }
  ConvGeometry g{x.dim(0), x.dim(1), x.dim(2), x.dim(3), weight.dim(0), weight.dim(2), 0, 0,
                 opt.stride, opt.padding, opt.dilation};
  g.oh = (g.h + 2 * g.padding - g.dilation * (g.k - 1) - 1) / g.stride + 1;
  g.ow = (g.w + 2 * g.padding - g.dilation * (g.k - 1) - 1) / g.stride + 1;
  if (g.oh <= 0 || g.ow <= 0) throw ShapeError("conv2d: kernel larger than padded input");

  const auto patch = g.patch();
  const auto plane = g.out_plane();
  std::vector<float> out(static_cast<std::size_t>(g.n * g.o * plane));
  ConstMatrixMap wmat(weight.data().data(), g.o, patch);
  float* col = scratch(static_cast<std::size_t>(patch * plane)).data();
  for (std::int64_t b = 0; b < g.n; ++b) {
    im2col(x.data().data() + b * g.c * g.h * g.w, g, col);
    MatrixMap omat(out.data() + b * g.o * plane, g.o, plane);
    omat.noalias() = wmat * ConstMatrixMap(col, patch, plane);
    if (bias.defined()) {
      for (std::int64_t oc = 0; oc < g.o; ++oc) omat.row(oc).array() += bias.data()[oc];
    }
  }

  return detail::make_result(
      "conv2d", {g.n, g.o, g.oh, g.ow}, std::move(out), {x, weight, bias},
      [x, weight, bias, g](std::span<const float> grad) mutable {
        const auto patch = g.patch();
        const auto plane = g.out_plane();
        if (weight.requires_grad()) {
          // Columns are rebuilt rather than kept from the forward pass.
          MatrixMap gw(weight.grad_accumulator(), g.o, patch);
          float* col = scratch(static_cast<std::size_t>(patch * plane)).data();
          for (std::int64_t b = 0; b < g.n; ++b) {
            im2col(x.data().data() + b * g.c * g.h * g.w, g, col);
            ConstMatrixMap go(grad.data() + b * g.o * plane, g.o, plane);
            gw.noalias() += go * ConstMatrixMap(col, patch, plane).transpose();
          }
        }
        if (bias.defined() && bias.requires_grad()) {
          float* gb = bias.grad_accumulator();
          for (std::int64_t b = 0; b < g.n; ++b) {
            for (std::int64_t oc = 0; oc < g.o; ++oc) {
              double s = 0.0;
              const float* go = grad.data() + (b * g.o + oc) * plane;
              for (std::int64_t i = 0; i < plane; ++i) s += go[i];
              gb[oc] += static_cast<float>(s);
            }
          }
        }
        if (x.requires_grad()) {
          float* gx = x.grad_accumulator();
          ConstMatrixMap wmat(weight.data().data(), g.o, patch);
          MatrixMap dcol(scratch(static_cast<std::size_t>(patch * plane)).data(), patch, plane);
          for (std::int64_t b = 0; b < g.n; ++b) {
            ConstMatrixMap go(grad.data() + b * g.o * plane, g.o, plane);
            dcol.noalias() = wmat.transpose() * go;
            col2im_add(dcol.data(), g, gx + b * g.c * g.h * g.w);
          }
        }
      });
}

}  // namespace dgc::ops
