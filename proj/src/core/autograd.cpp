#include "vitalcast/core/autograd.hpp"

#include <unordered_set>

#include "vitalcast/error.hpp"

namespace vitalcast {

Tensor& GraphNode::grad_buffer() {
  if (grad.size() != value.size()) grad = Tensor(value.shape(), 0.0);
  return grad;
}

void GraphNode::accumulate(const Tensor& g) {
  if (g.size() != value.size()) {
    throw DimensionError("gradient shape " + shape_to_string(g.shape()) +
                         " does not match value shape " +
                         shape_to_string(value.shape()));
  }
  auto& buf = grad_buffer();
  for (std::size_t i = 0; i < g.size(); ++i) buf[i] += g[i];
}

Var::Var(Tensor value, bool requires_grad) : node_(std::make_shared<GraphNode>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

Tensor Var::grad() const {
  if (node_->grad.size() == node_->value.size()) return node_->grad;
  return Tensor(node_->value.shape(), 0.0);
}

void Var::zero_grad() { node_->grad = Tensor(); }

Var make_node(Tensor value, std::vector<Var> parents,
              std::function<void(GraphNode&)> backward_rule) {
  auto node = std::make_shared<GraphNode>();
  node->value = std::move(value);
  for (const auto& p : parents) {
    if (p.requires_grad()) node->requires_grad = true;
  }
  if (node->requires_grad) {
    node->parents.reserve(parents.size());
    for (auto& p : parents) node->parents.push_back(p.node());
    node->backward_rule = std::move(backward_rule);
  }
  return Var(std::move(node));
}

void backward(const Var& loss) {
  if (!loss) throw ContractError("backward on empty variable");
  if (loss.value().size() != 1) {
    throw ContractError("backward requires a scalar loss, got shape " +
                        shape_to_string(loss.shape()));
  }
  if (!loss.requires_grad()) return;

  // Iterative post-order DFS gives a topological order without recursion depth
  // limits on long recurrent unrolls.
  std::vector<GraphNode*> order;
  std::unordered_set<GraphNode*> visited;
  std::vector<std::pair<GraphNode*, std::size_t>> stack;
  stack.emplace_back(loss.node().get(), 0);
  visited.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      GraphNode* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) {
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  loss.node()->grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    GraphNode* node = *it;
    if (node->backward_rule && node->grad.size() == node->value.size()) {
      node->backward_rule(*node);
    }
  }
  // Interior gradients are no longer needed; leaves keep theirs.
  for (GraphNode* node : order) {
    if (!node->parents.empty()) node->grad = Tensor();
  }
}

}  // namespace vitalcast
