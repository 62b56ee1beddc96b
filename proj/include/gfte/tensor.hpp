#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <sstream>
#include <unordered_set>
#include <utility>
#include <vector>

#include "gfte/error.hpp"

namespace gfte {

using Index = Eigen::Index;

template <typename S>
using ArrayX = Eigen::Array<S, Eigen::Dynamic, 1>;
template <typename S>
using MatrixRM = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using MatMap = Eigen::Map<MatrixRM<S>>;
template <typename S>
using ConstMatMap = Eigen::Map<const MatrixRM<S>>;

class Shape {
 public:
  Shape() = default;
  Shape(std::initializer_list<Index> dims) : dims_(dims) {}
  explicit Shape(std::vector<Index> dims) : dims_(std::move(dims)) {}

  Index rank() const { return static_cast<Index>(dims_.size()); }
  Index dim(Index i) const { return dims_[static_cast<std::size_t>(i)]; }
  const std::vector<Index>& dims() const { return dims_; }

  Index numel() const {
    Index n = 1;
    for (Index d : dims_) n *= d;
    return n;
  }

  bool operator==(const Shape& o) const { return dims_ == o.dims_; }
  bool operator!=(const Shape& o) const { return !(*this == o); }

  std::string str() const {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < dims_.size(); ++i) os << (i ? "," : "") << dims_[i];
    os << "]";
    return os.str();
  }

 private:
  std::vector<Index> dims_;
};

namespace detail {

template <typename S>
struct Node {
  Shape shape;
  ArrayX<S> value;
  ArrayX<S> grad;  // sized during backward, only for requires-grad nodes
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;
};

}  // namespace detail

// Dense tensor handle with reverse-mode gradient tracking. Copies share the
// underlying node, so a parameter handed to several ops accumulates gradient
// from each use. Scalar type S is float for training and double for gradient
// checking; nothing else differs between the two modes.
template <typename S>
class Tensor {
 public:
  using Node = detail::Node<S>;

  Tensor() = default;

  static Tensor zeros(Shape shape) {
    Tensor t;
    t.node_ = std::make_shared<Node>();
    t.node_->shape = std::move(shape);
    t.node_->value = ArrayX<S>::Zero(t.node_->shape.numel());
    return t;
  }

  static Tensor full(Shape shape, S v) {
    Tensor t = zeros(std::move(shape));
    t.node_->value.setConstant(v);
    return t;
  }

  static Tensor scalar(S v) { return full(Shape{1}, v); }

  static Tensor from_data(Shape shape, std::vector<S> data) {
    if (static_cast<Index>(data.size()) != shape.numel())
      throw UsageError("Tensor::from_data: " + std::to_string(data.size()) +
                       " values for shape " + shape.str());
    Tensor t = zeros(std::move(shape));
    for (Index i = 0; i < t.numel(); ++i) t.node_->value[i] = data[static_cast<std::size_t>(i)];
    return t;
  }

  static Tensor from_matrix(const MatrixRM<S>& m) {
    Tensor t = zeros(Shape{m.rows(), m.cols()});
    t.mat() = m;
    return t;
  }

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  Index rank() const { return node_->shape.rank(); }
  Index dim(Index i) const { return node_->shape.dim(i); }
  Index numel() const { return node_->shape.numel(); }

  ArrayX<S>& value() { return node_->value; }
  const ArrayX<S>& value() const { return node_->value; }

  bool has_grad() const { return node_->grad.size() == numel(); }
  const ArrayX<S>& grad() const {
    if (!has_grad()) throw UsageError("Tensor::grad: no gradient present; run backward first");
    return node_->grad;
  }

  bool requires_grad() const { return node_->requires_grad; }
  Tensor& set_requires_grad(bool rg = true) {
    node_->requires_grad = rg;
    return *this;
  }

  S item() const {
    if (numel() != 1) throw UsageError("Tensor::item: tensor has shape " + shape().str());
    return node_->value[0];
  }

  // Matrix view of the flat row-major buffer. Rank-1 tensors view as 1 x n.
  MatMap<S> mat() {
    auto [r, c] = mat_dims();
    return MatMap<S>(node_->value.data(), r, c);
  }
  ConstMatMap<S> mat() const {
    auto [r, c] = mat_dims();
    return ConstMatMap<S>(node_->value.data(), r, c);
  }

  // Reverse-mode sweep from a scalar. Zeroes and repopulates gradients of every
  // requires-grad node reachable through the graph, parameters included.
  void backward() const {
    if (numel() != 1) throw UsageError("backward: root must be scalar, got " + shape().str());
    if (!node_->requires_grad)
      throw UsageError("backward: root does not require gradients; nothing to do");

    std::vector<Node*> topo = topo_order();
    for (Node* n : topo)
      if (n->requires_grad) n->grad = ArrayX<S>::Zero(n->shape.numel());
    node_->grad[0] = S(1);
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
      Node* n = *it;
      if (n->requires_grad && n->backward_fn) n->backward_fn(*n);
    }
  }

  std::shared_ptr<Node> node() const { return node_; }

  static Tensor from_node(std::shared_ptr<Node> n) {
    Tensor t;
    t.node_ = std::move(n);
    return t;
  }

 private:
  std::pair<Index, Index> mat_dims() const {
    const Shape& s = node_->shape;
    if (s.rank() == 2) return {s.dim(0), s.dim(1)};
    if (s.rank() == 1) return {Index(1), s.dim(0)};
    throw UsageError("Tensor::mat: rank-" + std::to_string(s.rank()) + " tensor " + s.str());
  }

  // Iterative post-order DFS over parents; order is fixed by construction order.
  std::vector<Node*> topo_order() const {
    std::vector<Node*> topo;
    std::unordered_set<Node*> visited;
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.emplace_back(node_.get(), 0);
    visited.insert(node_.get());
    while (!stack.empty()) {
      auto& [n, next] = stack.back();
      if (next < n->parents.size()) {
        Node* p = n->parents[next++].get();
        if (!visited.count(p)) {
          visited.insert(p);
          stack.emplace_back(p, 0);
        }
      } else {
        topo.push_back(n);
        stack.pop_back();
      }
    }
    return topo;
  }

  std::shared_ptr<Node> node_;
};

namespace detail {

// Assembles an op result. The graph edge is recorded only when some input
// tracks gradients, so inference builds no graph at all.
template <typename S>
Tensor<S> make_op(Shape shape, ArrayX<S> value, const std::vector<Tensor<S>>& inputs,
                  std::function<void(Node<S>&)> backward_fn) {
  auto n = std::make_shared<Node<S>>();
  n->shape = std::move(shape);
  n->value = std::move(value);
  for (const auto& in : inputs) {
    if (in.requires_grad()) {
      n->requires_grad = true;
      break;
    }
  }
  if (n->requires_grad) {
    n->backward_fn = std::move(backward_fn);
    for (const auto& in : inputs) n->parents.push_back(in.node());
  }
  return Tensor<S>::from_node(std::move(n));
}

template <typename S>
void accumulate(Node<S>& parent, const ArrayX<S>& g) {
  if (parent.requires_grad) parent.grad += g;
}

}  // namespace detail

}  // namespace gfte
