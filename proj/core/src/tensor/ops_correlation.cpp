#include "dgc/error.hpp"
#include "dgc/tensor/ops.hpp"

namespace dgc::ops {

namespace {

void check_pair(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.defined() || !b.defined() || a.rank() != 4 || b.rank() != 4) {
    throw ShapeError(std::string(op) + ": inputs must be N x C x H x W");
  }
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": spatial/channel size mismatch " +
                     shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
}

}  // namespace

Tensor global_correlation(const Tensor& a, const Tensor& b) {
  check_pair(a, b, "global_correlation");
  const auto n = a.dim(0), c = a.dim(1), plane = a.dim(2) * a.dim(3);
  auto da = a.data();
  auto db = b.data();
  std::vector<float> out(static_cast<std::size_t>(n * plane * plane));
  std::vector<double> acc(static_cast<std::size_t>(plane));
  for (std::int64_t s = 0; s < n; ++s) {
    const float* fa = da.data() + s * c * plane;
    const float* fb = db.data() + s * c * plane;
    for (std::int64_t k = 0; k < plane; ++k) {
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::int64_t ch = 0; ch < c; ++ch) {
        const double bv = fb[ch * plane + k];
        const float* ra = fa + ch * plane;
        for (std::int64_t p = 0; p < plane; ++p) acc[p] += bv * ra[p];
      }
      float* dst = out.data() + (s * plane + k) * plane;
      for (std::int64_t p = 0; p < plane; ++p) dst[p] = static_cast<float>(acc[p]);
    }
  }
  return detail::make_result(
      "global_correlation", {n, plane, a.dim(2), a.dim(3)}, std::move(out), {a, b},
      [a, b, n, c, plane](std::span<const float> g) mutable {
        auto da = a.data();
        auto db = b.data();
        float* ga = a.requires_grad() ? a.grad_accumulator() : nullptr;
        float* gb = b.requires_grad() ? b.grad_accumulator() : nullptr;
        std::vector<double> acc(static_cast<std::size_t>(plane));
        for (std::int64_t s = 0; s < n; ++s) {
          const float* fa = da.data() + s * c * plane;
          const float* fb = db.data() + s * c * plane;
          const float* go = g.data() + s * plane * plane;  // [k][p]
          if (ga) {
            // ga[ch, p] = sum_k go[k, p] * b[ch, k]
            for (std::int64_t ch = 0; ch < c; ++ch) {
              std::fill(acc.begin(), acc.end(), 0.0);
              for (std::int64_t k = 0; k < plane; ++k) {
                const double bv = fb[ch * plane + k];
                const float* row = go + k * plane;
                for (std::int64_t p = 0; p < plane; ++p) acc[p] += bv * row[p];
              }
              float* dst = ga + s * c * plane + ch * plane;
              for (std::int64_t p = 0; p < plane; ++p) dst[p] += static_cast<float>(acc[p]);
            }
          }
          if (gb) {
            // gb[ch, k] = sum_p go[k, p] * a[ch, p]
            for (std::int64_t ch = 0; ch < c; ++ch) {
              const float* ra = fa + ch * plane;
              float* dst = gb + s * c * plane + ch * plane;
              for (std::int64_t k = 0; k < plane; ++k) {
                const float* row = go + k * plane;
                double t = 0.0;
                for (std::int64_t p = 0; p < plane; ++p) t += static_cast<double>(row[p]) * ra[p];
                dst[k] += static_cast<float>(t);
              }
            }
          }
        }
      });
}

Tensor local_correlation(const Tensor& a, const Tensor& b, int radius) {
  if (radius < 0) throw UsageError("local_correlation: radius must be >= 0");
  check_pair(a, b, "local_correlation");
  const auto n = a.dim(0), c = a.dim(1), h = a.dim(2), w = a.dim(3);
  const auto plane = h * w;
  const std::int64_t side = 2 * radius + 1;
  const std::int64_t channels = side * side;
  auto da = a.data();
  auto db = b.data();
  std::vector<float> out(static_cast<std::size_t>(n * channels * plane), 0.0f);
  for (std::int64_t s = 0; s < n; ++s) {
    const float* fa = da.data() + s * c * plane;
    const float* fb = db.data() + s * c * plane;
    for (std::int64_t d = 0; d < channels; ++d) {
      const std::int64_t dy = d / side - radius, dx = d % side - radius;
      float* dst = out.data() + (s * channels + d) * plane;
      for (std::int64_t i = 0; i < h; ++i) {
        const std::int64_t ti = i + dy;
        if (ti < 0 || ti >= h) continue;
        for (std::int64_t j = 0; j < w; ++j) {
          const std::int64_t tj = j + dx;
          if (tj < 0 || tj >= w) continue;
          double acc = 0.0;
          for (std::int64_t ch = 0; ch < c; ++ch) {
            acc += static_cast<double>(fa[ch * plane + i * w + j]) * fb[ch * plane + ti * w + tj];
          }
          dst[i * w + j] = static_cast<float>(acc);
        }
      }
    }
  }
  return detail::make_result(
      "local_correlation", {n, channels, h, w}, std::move(out), {a, b},
      [a, b, n, c, h, w, radius, side, channels](std::span<const float> g) mutable {
        const auto plane = h * w;
        auto da = a.data();
        auto db = b.data();
        float* ga = a.requires_grad() ? a.grad_accumulator() : nullptr;
        float* gb = b.requires_grad() ? b.grad_accumulator() : nullptr;
        for (std::int64_t s = 0; s < n; ++s) {
          const float* fa = da.data() + s * c * plane;
          const float* fb = db.data() + s * c * plane;
          for (std::int64_t d = 0; d < channels; ++d) {
            const std::int64_t dy = d / side - radius, dx = d % side - radius;
            const float* go = g.data() + (s * channels + d) * plane;
            for (std::int64_t i = 0; i < h; ++i) {
              const std::int64_t ti = i + dy;
              if (ti < 0 || ti >= h) continue;
              for (std::int64_t j = 0; j < w; ++j) {
                const std::int64_t tj = j + dx;
                if (tj < 0 || tj >= w) continue;
                const float gv = go[i * w + j];
                if (gv == 0.0f) continue;
                for (std::int64_t ch = 0; ch < c; ++ch) {
                  const auto ia = s * c * plane + ch * plane + i * w + j;
                  const auto ib = s * c * plane + ch * plane + ti * w + tj;
                  if (ga) ga[ia] += gv * fb[ch * plane + ti * w + tj];
                  if (gb) gb[ib] += gv * fa[ch * plane + i * w + j];
                }
              }
            }
          }
        }
      });
}

}  // namespace dgc::ops
