#pragma once

#include <vector>

#include "dgc/tensor/tensor.hpp"

// Differentiable operations on NCHW tensors. Every op validates its
// inputs, rejects non-finite outputs and, when grad mode is on and an input
// requires grad, records a backward closure in the graph.
namespace dgc::ops {

// ---- elementwise / structural -------------------------------------------

Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor add(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, float factor);
Tensor sum(const Tensor& x);
// Weighted sum: sum_i x_i * w_i with a constant weight buffer.
Tensor dot_constant(const Tensor& x, std::span<const float> weights);

Tensor concat_channels(const std::vector<Tensor>& xs);
Tensor slice_channels(const Tensor& x, std::int64_t begin, std::int64_t count);

// Bilinear 2x upsampling, align-corners convention.
Tensor upsample_bilinear_2x(const Tensor& x);

// ---- convolution / normalization ----------------------------------------

struct Conv2dOptions {
  int stride = 1;
  int padding = 0;
  int dilation = 1;
};

// x: N x C x H x W, weight: O x C x k x k, bias: O (or undefined).
Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias,
              Conv2dOptions options = {});

// Running statistics owned by the model state, not by the graph.
struct BatchNormStats {
  std::vector<float> running_mean;
  std::vector<float> running_var;

  static BatchNormStats identity(std::size_t channels);
};

inline constexpr float kBatchNormEps = 1e-5f;
inline constexpr float kBatchNormMomentum = 0.1f;

// Training mode normalizes with batch statistics over (N, H, W) and updates
// `stats` with `momentum`; eval mode normalizes with `stats`.
Tensor batchnorm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                 BatchNormStats& stats, bool training, float eps = kBatchNormEps,
                 float momentum = kBatchNormMomentum);

inline constexpr float kL2NormEps = 1e-6f;

// Unit Euclidean norm of the C-vector at every (n, i, j); norms below eps
// are clamped to eps.
Tensor l2_normalize_channels(const Tensor& x, float eps = kL2NormEps);

// ---- correlation ----------------------------------------------------------

// out[n, k, i, j] = <a[n, :, i, j], b[n, :, k / W, k % W]>, shape N x HW x H x W.
Tensor global_correlation(const Tensor& a, const Tensor& b);

// out[n, d, i, j] = <a[n, :, i, j], b[n, :, i + dy, j + dx]>, zero outside,
// d = (dy + r) * (2r + 1) + (dx + r).
Tensor local_correlation(const Tensor& a, const Tensor& b, int radius);

// ---- sampling ---------------------------------------------------------------

// Bilinear sampling of x (N x C x H x W) at grid (N x 2 x H' x W', channel 0
// is u, channel 1 is v, both normalized to [-1, 1] with align-corners).
// Samples outside the image read zeros. Differentiable in x and in grid.
Tensor grid_sample(const Tensor& x, const Tensor& grid);

// Identity sampling grid of shape N x 2 x H x W.
Tensor identity_grid(std::int64_t n, std::int64_t h, std::int64_t w);

// ---- losses -----------------------------------------------------------------

// (1 / N_val) * sum over pixels with mask != 0 of the L1 norm of
// (est - target) across channels. est/target: N x C x H x W, mask:
// N x 1 x H x W. Returns 0 when the mask is empty. Only est is differentiated;
// target and mask are constants.
Tensor masked_l1_loss(const Tensor& est, const Tensor& target, const Tensor& mask);

// Mean binary cross entropy with logits, numerically stable form. The
// target is a constant.
Tensor bce_with_logits(const Tensor& logits, const Tensor& target);

}  // namespace dgc::ops
