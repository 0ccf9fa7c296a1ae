#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace dgc {

using Shape = std::vector<std::int64_t>;

std::int64_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

struct TensorImpl;

// Reverse-mode graph node. `backward` reads the gradient of the produced
// tensor and accumulates into the gradients of `inputs`.
struct GradNode {
  std::string op;
  std::vector<std::shared_ptr<TensorImpl>> inputs;
  std::function<void(std::span<const float> grad_out)> backward;
};

struct TensorImpl {
  Shape shape;
  std::vector<float> data;
  std::vector<float> grad;  // empty until the first accumulation
  bool requires_grad = false;
  std::shared_ptr<GradNode> node;  // null for leaves
};

/// Dense float32 N-d array with shared ownership of its storage.
///
/// Copies of a Tensor alias the same storage. A default-constructed Tensor
/// is "undefined" and is used for optional arguments (e.g. a missing bias).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<TensorImpl> impl) : impl_(std::move(impl)) {}

  static Tensor zeros(const Shape& shape, bool requires_grad = false);
  static Tensor full(const Shape& shape, float value, bool requires_grad = false);
  static Tensor from_data(const Shape& shape, std::vector<float> data,
                          bool requires_grad = false);
  static Tensor scalar(float value, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const;
  std::int64_t dim(std::size_t axis) const;
  std::size_t rank() const { return shape().size(); }
  std::int64_t numel() const { return static_cast<std::int64_t>(impl_->data.size()); }

  std::span<const float> data() const { return impl_->data; }
  // Mutable access is reserved for leaves (parameters, optimizer updates).
  std::span<float> mutable_data() { return impl_->data; }
  float item() const;
  float at(std::initializer_list<std::int64_t> index) const;

  bool requires_grad() const { return impl_ && impl_->requires_grad; }
  void set_requires_grad(bool value);
  bool is_leaf() const;

  bool has_grad() const { return impl_ && !impl_->grad.empty(); }
  std::span<const float> grad() const { return impl_->grad; }
  std::span<float> mutable_grad() { return impl_->grad; }
  void zero_grad();

  // Accumulating gradient buffer, allocated (zeroed) on first use.
  float* grad_accumulator() const;

  // Deep copy of the data as a new leaf without history.
  Tensor detach() const;

  const std::shared_ptr<TensorImpl>& impl() const { return impl_; }

 private:
  std::shared_ptr<TensorImpl> impl_;
};

/// Populates `.grad()` of every requires-grad tensor reachable from `loss`.
/// Gradients accumulate additively into any existing buffers.
void backward(const Tensor& loss);

bool grad_enabled();

// Disables graph recording for its lifetime (evaluation, optimizer steps).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

namespace detail {

// Wraps a freshly computed buffer as an op output: validates finiteness,
// and records a graph node when any input requires grad.
Tensor make_result(const char* op, Shape shape, std::vector<float> data,
                   std::vector<Tensor> inputs,
                   std::function<void(std::span<const float>)> backward_fn);

void check_finite(const char* op, std::span<const float> values);

}  // namespace detail

}  // namespace dgc
