#include <cmath>

#include "dgc/error.hpp"
#include "dgc/tensor/ops.hpp"

namespace dgc::ops {

namespace {

// Normalized align-corners coordinate to pixel coordinate.
inline double to_pixel(double u, std::int64_t size) {
  return size > 1 ? (u + 1.0) * 0.5 * static_cast<double>(size - 1) : 0.0;
}

inline double pixel_scale(std::int64_t size) {
  return size > 1 ? 0.5 * static_cast<double>(size - 1) : 0.0;
}

}  // namespace

Tensor identity_grid(std::int64_t n, std::int64_t h, std::int64_t w) {
  std::vector<float> data(static_cast<std::size_t>(n * 2 * h * w));
  for (std::int64_t b = 0; b < n; ++b) {
    float* u = data.data() + b * 2 * h * w;
    float* v = u + h * w;
    for (std::int64_t i = 0; i < h; ++i) {
      const double vi = h > 1 ? 2.0 * i / (h - 1) - 1.0 : 0.0;
      for (std::int64_t j = 0; j < w; ++j) {
        const double uj = w > 1 ? 2.0 * j / (w - 1) - 1.0 : 0.0;
        u[i * w + j] = static_cast<float>(uj);
        v[i * w + j] = static_cast<float>(vi);
      }
    }
  }
  return Tensor::from_data({n, 2, h, w}, std::move(data));
}

Tensor grid_sample(const Tensor& x, const Tensor& grid) {
  if (!x.defined() || x.rank() != 4) throw ShapeError("grid_sample: x must be N x C x H x W");
  if (!grid.defined() || grid.rank() != 4 || grid.dim(1) != 2 || grid.dim(0) != x.dim(0)) {
    throw ShapeError("grid_sample: grid must be N x 2 x H' x W' with matching N");
  }
  const auto n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const auto oh = grid.dim(2), ow = grid.dim(3);
  const auto in_plane = h * w, out_plane = oh * ow;
  auto in = x.data();
  auto gd = grid.data();
  std::vector<float> out(static_cast<std::size_t>(n * c * out_plane));

  for (std::int64_t b = 0; b < n; ++b) {
    const float* gu = gd.data() + b * 2 * out_plane;
    const float* gv = gu + out_plane;
    for (std::int64_t p = 0; p < out_plane; ++p) {
      const double px = to_pixel(gu[p], w), py = to_pixel(gv[p], h);
      const double fx = std::floor(px), fy = std::floor(py);
      const auto x0 = static_cast<std::int64_t>(fx), y0 = static_cast<std::int64_t>(fy);
      const double ax = px - fx, ay = py - fy;
      const double wts[4] = {(1 - ax) * (1 - ay), ax * (1 - ay), (1 - ax) * ay, ax * ay};
      const std::int64_t xs[4] = {x0, x0 + 1, x0, x0 + 1};
      const std::int64_t ys[4] = {y0, y0, y0 + 1, y0 + 1};
      for (std::int64_t ch = 0; ch < c; ++ch) {
        const float* src = in.data() + (b * c + ch) * in_plane;
        double acc = 0.0;
        for (int t = 0; t < 4; ++t) {
          if (xs[t] < 0 || xs[t] >= w || ys[t] < 0 || ys[t] >= h || wts[t] == 0.0) continue;
          acc += wts[t] * src[ys[t] * w + xs[t]];
        }
        out[(b * c + ch) * out_plane + p] = static_cast<float>(acc);
      }
    }
  }

  return detail::make_result(
      "grid_sample", {n, c, oh, ow}, std::move(out), {x, grid},
      [x, grid, n, c, h, w, out_plane, in_plane](std::span<const float> g) mutable {
        const bool need_x = x.requires_grad(), need_grid = grid.requires_grad();
        float* gx = need_x ? x.grad_accumulator() : nullptr;
        float* gg = need_grid ? grid.grad_accumulator() : nullptr;
        auto in = x.data();
        auto gd = grid.data();
        const double sx = pixel_scale(w), sy = pixel_scale(h);
        for (std::int64_t b = 0; b < n; ++b) {
          const float* gu = gd.data() + b * 2 * out_plane;
          const float* gv = gu + out_plane;
          for (std::int64_t p = 0; p < out_plane; ++p) {
            const double px = to_pixel(gu[p], w), py = to_pixel(gv[p], h);
            const double fx = std::floor(px), fy = std::floor(py);
            const auto x0 = static_cast<std::int64_t>(fx), y0 = static_cast<std::int64_t>(fy);
            const double ax = px - fx, ay = py - fy;
            auto inside = [&](std::int64_t xx, std::int64_t yy) {
              return xx >= 0 && xx < w && yy >= 0 && yy < h;
            };
            double du = 0.0, dv = 0.0;
            for (std::int64_t ch = 0; ch < c; ++ch) {
              const double go = g[(b * c + ch) * out_plane + p];
              if (go == 0.0) continue;
              const float* src = in.data() + (b * c + ch) * in_plane;
              auto val = [&](std::int64_t xx, std::int64_t yy) -> double {
                return inside(xx, yy) ? src[yy * w + xx] : 0.0;
              };
              if (gx) {
                float* dst = gx + (b * c + ch) * in_plane;
                if (inside(x0, y0)) dst[y0 * w + x0] += static_cast<float>(go * (1 - ax) * (1 - ay));
                if (inside(x0 + 1, y0)) dst[y0 * w + x0 + 1] += static_cast<float>(go * ax * (1 - ay));
                if (inside(x0, y0 + 1)) dst[(y0 + 1) * w + x0] += static_cast<float>(go * (1 - ax) * ay);
                if (inside(x0 + 1, y0 + 1))
                  dst[(y0 + 1) * w + x0 + 1] += static_cast<float>(go * ax * ay);
              }
              if (gg) {
                const double v00 = val(x0, y0), v10 = val(x0 + 1, y0);
                const double v01 = val(x0, y0 + 1), v11 = val(x0 + 1, y0 + 1);
                du += go * ((1 - ay) * (v10 - v00) + ay * (v11 - v01));
                dv += go * ((1 - ax) * (v01 - v00) + ax * (v11 - v10));
              }
            }
            if (gg) {
              gg[b * 2 * out_plane + p] += static_cast<float>(du * sx);
              gg[b * 2 * out_plane + out_plane + p] += static_cast<float>(dv * sy);
            }
          }
        }
      });
}

}  // namespace dgc::ops
