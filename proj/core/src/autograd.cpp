#include "motiondesk/autograd.hpp"

#include <algorithm>

#include "motiondesk/error.hpp"

namespace md {

Graph::Graph(Trainable mode) : all_trainable_(mode == Trainable::all) {}

Graph::Graph(std::span<Parameter* const> trainable) : all_trainable_(false) {
  for (const Parameter* p : trainable) trainable_.insert(p);
}

bool Graph::is_trainable(const Parameter& p) const {
  return all_trainable_ || trainable_.contains(&p);
}

Var Graph::constant(Tensor value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Graph::param(Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var(this, it->second);
  Node node;
  node.value = p.value;
  node.value.clear_grad();
  node.requires_grad = is_trainable(p);
  node.param = node.requires_grad ? &p : nullptr;
  nodes_.push_back(std::move(node));
  param_nodes_.emplace(&p, nodes_.size() - 1);
  return Var(this, nodes_.size() - 1);
}

Var Graph::record(Tensor value, std::vector<std::size_t> inputs, BackwardFn backward) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = std::any_of(inputs.begin(), inputs.end(),
                                   [this](std::size_t id) { return nodes_[id].requires_grad; });
  if (node.requires_grad) {
    node.inputs = std::move(inputs);
    node.backward = std::move(backward);
  }
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

std::span<double> Graph::grad_buffer(std::size_t id) {
  Node& node = nodes_[id];
  if (node.grad.empty()) node.grad.assign(node.value.size(), 0.0);
  return node.grad;
}

void Graph::backward(Var output) {
  if (output.graph_ != this) throw Error("backward: variable belongs to another graph");
  if (output.value().size() != 1) {
    throw ShapeError("backward: output must be a scalar, got shape " +
                     shape_string(output.value().shape()));
  }
  for (Node& node : nodes_) node.grad.clear();
  if (!nodes_[output.id()].requires_grad) return;

  grad_buffer(output.id())[0] = 1.0;
  for (std::size_t id = output.id() + 1; id-- > 0;) {
    Node& node = nodes_[id];
    if (!node.requires_grad || node.grad.empty() || !node.backward) continue;
    node.backward(*this, id);
  }
  for (Node& node : nodes_) {
    if (node.param == nullptr || node.grad.empty()) continue;
    std::span<double> target = node.param->value.ensure_grad();
    for (std::size_t i = 0; i < target.size(); ++i) target[i] += node.grad[i];
  }
}

}  // namespace md
