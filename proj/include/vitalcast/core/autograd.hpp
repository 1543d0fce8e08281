#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "vitalcast/core/tensor.hpp"

namespace vitalcast {

struct GraphNode;
using NodePtr = std::shared_ptr<GraphNode>;

/// One vertex of a reverse-mode differentiation graph.
///
/// `backward_rule` reads `grad` (the gradient of the loss w.r.t. `value`) and
/// accumulates into the gradients of `parents`. Leaves have no rule.
struct GraphNode {
  Tensor value;
  Tensor grad;
  bool requires_grad = false;
  std::vector<NodePtr> parents;
  std::function<void(GraphNode&)> backward_rule;

  /// Adds `g` into `grad`, allocating a zero gradient on first use.
  void accumulate(const Tensor& g);
  Tensor& grad_buffer();
};

/// Handle to a graph node. Copies share the node.
class Var {
 public:
  Var() = default;
  explicit Var(Tensor value, bool requires_grad = false);
  explicit Var(NodePtr node) : node_(std::move(node)) {}

  const Tensor& value() const { return node_->value; }
  Tensor& mutable_value() { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }

  /// Gradient accumulated by the last backward pass; zeros if none reached it.
  Tensor grad() const;
  void zero_grad();

  const NodePtr& node() const { return node_; }
  explicit operator bool() const { return static_cast<bool>(node_); }

 private:
  NodePtr node_;
};

/// Creates a node whose value is `value`, depending on `parents`. The node
/// requires a gradient if any parent does; otherwise the rule is dropped.
Var make_node(Tensor value, std::vector<Var> parents,
              std::function<void(GraphNode&)> backward_rule);

/// Reverse-mode sweep from a scalar loss. Accumulates d loss / d leaf into the
/// `grad` of every leaf with requires_grad. Each node is visited once, in
/// reverse topological order.
void backward(const Var& loss);

}  // namespace vitalcast
