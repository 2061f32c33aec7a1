#include "mmvs/neural/tensor.hpp"

#include <stdexcept>
#include <unordered_set>

namespace mmvs::nn {

namespace {

thread_local bool g_grad_enabled = true;

}  // namespace

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool grad_enabled() { return g_grad_enabled; }

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values, bool requires_grad)
    : node_(std::make_shared<detail::Node<T>>()) {
  if (shape_numel(shape) != values.size()) {
    throw std::invalid_argument("tensor values do not match shape " + shape_string(shape));
  }
  node_->shape = std::move(shape);
  node_->value = std::move(values);
  node_->requires_grad = requires_grad;
}

template <typename T>
Tensor<T> Tensor<T>::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), T(0), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::full(Shape shape, T value, bool requires_grad) {
  const auto n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<T>(n, value), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::scalar(T value, bool requires_grad) {
  return Tensor(Shape{1}, std::vector<T>{value}, requires_grad);
}

template <typename T>
T Tensor<T>::item() const {
  if (numel() != 1) throw std::logic_error("item() needs a one-element tensor, got " + shape_string(shape()));
  return node_->value[0];
}

template <typename T>
Tensor<T> Tensor<T>::detach() const {
  return Tensor(node_->shape, node_->value, false);
}

template <typename T>
void backward(const Tensor<T>& loss) {
  using NodePtr = detail::Node<T>*;
  if (!loss.defined() || !loss.requires_grad() || loss.is_leaf()) {
    throw std::logic_error("backward() called on a tensor that is not part of a recorded graph");
  }
  if (loss.numel() != 1) throw std::logic_error("backward() needs a scalar loss");

  // Iterative post-order DFS gives a topological order.
  std::vector<NodePtr> order;
  std::unordered_set<NodePtr> seen;
  std::vector<std::pair<NodePtr, std::size_t>> stack{{loss.node().get(), 0}};
  seen.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      NodePtr child = node->inputs[next++].get();
      if (child->requires_grad && seen.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  loss.node()->grad_buffer()[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    NodePtr node = *it;
    if (node->backward_fn && !node->grad.empty()) node->backward_fn(*node);
  }
  for (NodePtr node : order) {
    if (node->backward_fn) {
      node->backward_fn = nullptr;
      node->inputs.clear();
      node->grad.clear();
      node->grad.shrink_to_fit();
    }
  }
}

template class Tensor<float>;
template class Tensor<double>;
template void backward<float>(const Tensor<float>&);
template void backward<double>(const Tensor<double>&);

}  // namespace mmvs::nn
