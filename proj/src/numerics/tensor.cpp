#include "master/numerics/tensor.hpp"

#include <atomic>
#include <cmath>
#include <unordered_set>
#include <utility>

namespace master::nn {

namespace {

#ifdef NDEBUG
std::atomic<bool> g_finite_checks{false};
#else
std::atomic<bool> g_finite_checks{true};
#endif

thread_local bool t_grad_mode = true;

void check_finite(std::string_view op, const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw NonFiniteError("non-finite value produced by '" + std::string(op) +
                           "' at flat index " + std::to_string(i));
    }
  }
}

}  // namespace

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto extent : shape) n *= extent;
  return n;
}

std::string to_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

void set_finite_checks(bool enabled) { g_finite_checks = enabled; }
bool finite_checks_enabled() { return g_finite_checks; }

NoGradGuard::NoGradGuard() : previous_(t_grad_mode) { t_grad_mode = false; }
NoGradGuard::~NoGradGuard() { t_grad_mode = previous_; }
bool grad_mode_enabled() { return t_grad_mode; }

std::vector<double>& detail::Node::grad_buffer() {
  if (grad.empty()) grad.assign(value.size(), 0.0);
  return grad;
}

Tensor::Tensor() = default;

Tensor::Tensor(Shape shape, bool requires_grad)
    : Tensor(shape, std::vector<double>(numel(shape), 0.0), requires_grad) {}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad)
    : node_(std::make_shared<detail::Node>()) {
  if (numel(shape) != values.size()) {
    throw ShapeError("tensor shape " + to_string(shape) + " needs " +
                     std::to_string(numel(shape)) + " values, got " +
                     std::to_string(values.size()));
  }
  if (g_finite_checks) check_finite("construct", values);
  node_->shape = std::move(shape);
  node_->value = std::move(values);
  node_->requires_grad = requires_grad;
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor(Shape{}, {value}, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const auto n = numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
}

const Shape& Tensor::shape() const { return node_->shape; }

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= rank()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for shape " +
                     to_string(shape()));
  }
  return node_->shape[axis];
}

std::size_t Tensor::size() const { return node_->value.size(); }

std::span<const double> Tensor::values() const { return node_->value; }
std::span<double> Tensor::mutable_values() { return node_->value; }

double Tensor::item() const {
  if (size() != 1) {
    throw ShapeError("item() on tensor of shape " + to_string(shape()));
  }
  return node_->value[0];
}

double Tensor::at(std::initializer_list<std::size_t> index) const {
  if (index.size() != rank()) {
    throw ShapeError("index rank mismatch for shape " + to_string(shape()));
  }
  std::size_t flat = 0;
  std::size_t axis = 0;
  for (auto i : index) {
    if (i >= node_->shape[axis]) {
      throw ShapeError("index out of range for shape " + to_string(shape()));
    }
    flat = flat * node_->shape[axis] + i;
    ++axis;
  }
  return node_->value[flat];
}

bool Tensor::requires_grad() const { return node_->requires_grad; }
void Tensor::set_requires_grad(bool flag) { node_->requires_grad = flag; }
bool Tensor::has_grad() const { return !node_->grad.empty(); }
std::span<const double> Tensor::grad() const { return node_->grad; }
std::span<double> Tensor::mutable_grad() { return node_->grad_buffer(); }

void Tensor::zero_grad() {
  if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor Tensor::detach() const { return Tensor(node_->shape, node_->value); }

Tensor make_result(Shape shape, std::vector<double> values,
                   std::initializer_list<const Tensor*> inputs,
                   std::string_view op, detail::BackwardFn backward) {
  if (g_finite_checks) check_finite(op, values);
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->op = op;
  if (t_grad_mode) {
    bool any = false;
    for (const Tensor* input : inputs) {
      if (input && input->defined() && input->requires_grad()) any = true;
    }
    if (any) {
      node->requires_grad = true;
      node->is_leaf = false;
      for (const Tensor* input : inputs) {
        if (input && input->defined()) node->parents.push_back(input->node());
      }
      node->backward = std::move(backward);
    }
  }
  return Tensor(std::move(node));
}

Tape::Tape(const Tensor& root) : root_(root.node()) {
  if (!root_ || !root_->requires_grad) return;
  // Iterative post-order DFS; each node is emitted once, after its parents.
  std::unordered_set<const detail::Node*> visited;
  std::vector<std::pair<detail::Node*, std::size_t>> stack;
  stack.emplace_back(root_.get(), 0);
  visited.insert(root_.get());
  std::vector<std::shared_ptr<detail::Node>> order;
  std::vector<std::shared_ptr<detail::Node>> owner_stack{root_};
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      const auto& parent = node->parents[next++];
      if (parent->requires_grad && visited.insert(parent.get()).second) {
        stack.emplace_back(parent.get(), 0);
        owner_stack.push_back(parent);
      }
      continue;
    }
    order.push_back(owner_stack.back());
    owner_stack.pop_back();
    stack.pop_back();
  }
  order_ = std::move(order);
}

std::vector<std::string_view> Tape::ops() const {
  std::vector<std::string_view> out;
  out.reserve(order_.size());
  for (const auto& node : order_) out.push_back(node->op);
  return out;
}

void Tape::backward() {
  if (order_.empty()) return;
  for (auto& node : order_) {
    if (!node->is_leaf) node->grad.assign(node->value.size(), 0.0);
  }
  auto& seed = root_->grad_buffer();
  if (root_->is_leaf) {
    seed[0] += 1.0;
  } else {
    seed[0] = 1.0;
  }
  for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
    auto& node = **it;
    if (!node.is_leaf && node.backward) node.backward(node);
  }
}

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw ShapeError("backward() needs a scalar loss, got shape " +
                     (loss.defined() ? to_string(loss.shape()) : std::string("<undefined>")));
  }
  Tape tape(loss);
  tape.backward();
}

}  // namespace master::nn
