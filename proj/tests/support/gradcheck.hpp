#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dgc/tensor/tensor.hpp"

namespace dgc::testing {

// One randomized finite-difference case: `fn` maps the leaf inputs to any
// tensor, which is projected on fixed random weights to form a scalar.
struct GradCase {
  std::string name;
  std::vector<Tensor> inputs;  // leaves; the ones with requires_grad are checked
  std::function<Tensor(const std::vector<Tensor>&)> fn;
  // Elements checked per input (0 = all). Large inputs are subsampled.
  std::size_t max_elements = 0;
  // Composite graphs cannot be nudged off every ReLU kink and bilinear cell
  // boundary. With the guard on, an element whose central differences at h
  // and h/2 disagree has a kink inside the stencil and is skipped.
  bool kink_guard = false;
  // Central-difference step; 0 selects kFdStep.
  double step = 0.0;
};

struct GradResult {
  std::string name;
  double rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;  // kink-guarded elements
};

inline constexpr double kFdStep = 1e-3;

// Central differences with step h (the case's own step when set); the projection is accumulated in double.
// The error is ||g_analytic - g_fd|| / max(||g_analytic||, ||g_fd||) over
// every checked element of every input.
GradResult check_gradients(const GradCase& c, double h = kFdStep, std::uint64_t seed = 7);

// The randomized op-level suite (>= 100 cases) plus end-to-end loss cases.
std::vector<GradCase> op_gradient_cases(std::uint64_t seed);
std::vector<GradCase> model_gradient_cases(std::uint64_t seed);

}  // namespace dgc::testing
