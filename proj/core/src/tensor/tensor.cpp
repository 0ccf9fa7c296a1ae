#include "dgc/tensor/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "dgc/error.hpp"

namespace dgc {

namespace {
thread_local bool g_grad_enabled = true;
}

std::int64_t shape_numel(const Shape& shape) {
  std::int64_t n = 1;
  for (auto d : shape) {
    if (d < 0) throw ShapeError("negative dimension in shape " + shape_str(shape));
    n *= d;
  }
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor Tensor::zeros(const Shape& shape, bool requires_grad) {
  return full(shape, 0.0f, requires_grad);
}

Tensor Tensor::full(const Shape& shape, float value, bool requires_grad) {
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = shape;
  impl->data.assign(static_cast<std::size_t>(shape_numel(shape)), value);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::from_data(const Shape& shape, std::vector<float> data, bool requires_grad) {
  if (static_cast<std::int64_t>(data.size()) != shape_numel(shape)) {
    throw ShapeError("from_data: " + std::to_string(data.size()) +
                     " values do not fill shape " + shape_str(shape));
  }
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = shape;
  impl->data = std::move(data);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::scalar(float value, bool requires_grad) {
  return from_data({1}, {value}, requires_grad);
}

const Shape& Tensor::shape() const {
  if (!impl_) throw ShapeError("access to undefined tensor");
  return impl_->shape;
}

std::int64_t Tensor::dim(std::size_t axis) const {
  const auto& s = shape();
  if (axis >= s.size()) throw ShapeError("axis out of range for shape " + shape_str(s));
  return s[axis];
}

float Tensor::item() const {
  if (numel() != 1) throw ShapeError("item() on tensor of shape " + shape_str(shape()));
  return impl_->data[0];
}

float Tensor::at(std::initializer_list<std::int64_t> index) const {
  const auto& s = shape();
  if (index.size() != s.size()) throw ShapeError("at(): rank mismatch");
  std::int64_t offset = 0;
  std::size_t axis = 0;
  for (auto i : index) {
    if (i < 0 || i >= s[axis]) throw ShapeError("at(): index out of range");
    offset = offset * s[axis] + i;
    ++axis;
  }
  return impl_->data[static_cast<std::size_t>(offset)];
}

void Tensor::set_requires_grad(bool value) { impl_->requires_grad = value; }

bool Tensor::is_leaf() const { return impl_->node == nullptr; }

void Tensor::zero_grad() {
  if (impl_) impl_->grad.clear();
}

float* Tensor::grad_accumulator() const {
  if (impl_->grad.empty()) impl_->grad.assign(impl_->data.size(), 0.0f);
  return impl_->grad.data();
}

Tensor Tensor::detach() const { return from_data(shape(), impl_->data, false); }

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }

NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.numel() != 1) {
    throw ShapeError("backward: loss must be a single-element tensor");
  }
  if (!loss.requires_grad()) return;

  // Iterative post-order DFS yields a topological order of the tensors
  // that carry a producer node.
  std::vector<TensorImpl*> order;
  std::unordered_set<TensorImpl*> visited;
  std::vector<std::pair<TensorImpl*, std::size_t>> stack;
  stack.emplace_back(loss.impl().get(), 0);
  visited.insert(loss.impl().get());
  while (!stack.empty()) {
    auto& [impl, next] = stack.back();
    if (impl->node && next < impl->node->inputs.size()) {
      TensorImpl* child = impl->node->inputs[next++].get();
      if (child->requires_grad && visited.insert(child).second) {
        stack.emplace_back(child, 0);
      }
      continue;
    }
    order.push_back(impl);
    stack.pop_back();
  }

  TensorImpl* root = loss.impl().get();
  if (root->grad.empty()) root->grad.assign(1, 0.0f);
  root->grad[0] += 1.0f;

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TensorImpl* impl = *it;
    if (!impl->node || impl->grad.empty()) continue;
    impl->node->backward(impl->grad);
  }
}

namespace detail {

void check_finite(const char* op, std::span<const float> values) {
  for (float v : values) {
    if (!std::isfinite(v)) {
      throw NumericalError(std::string(op) + ": non-finite value in output");
    }
  }
}

Tensor make_result(const char* op, Shape shape, std::vector<float> data,
                   std::vector<Tensor> inputs,
                   std::function<void(std::span<const float>)> backward_fn) {
  check_finite(op, data);
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = std::move(shape);
  impl->data = std::move(data);
  const bool needs = grad_enabled() &&
                     std::any_of(inputs.begin(), inputs.end(),
                                 [](const Tensor& t) { return t.requires_grad(); });
  if (needs) {
    impl->requires_grad = true;
    auto node = std::make_shared<GradNode>();
    node->op = op;
    node->inputs.reserve(inputs.size());
    for (auto& t : inputs) {
      if (t.defined()) node->inputs.push_back(t.impl());
    }
    node->backward = std::move(backward_fn);
    impl->node = std::move(node);
  }
  return Tensor(std::move(impl));
}

}  // namespace detail

}  // namespace dgc
