#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "motiondesk/parameter.hpp"
#include "motiondesk/tensor.hpp"

namespace md {

class Graph;

/// Handle to a node on a Graph's tape.
class Var {
 public:
  Var() = default;

  Graph& graph() const { return *graph_; }
  std::size_t id() const { return id_; }
  bool valid() const { return graph_ != nullptr; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }

 private:
  friend class Graph;
  Var(Graph* graph, std::size_t id) : graph_(graph), id_(id) {}

  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

/// Which parameters receive gradients on a graph.
enum class Trainable { all, none };

/// Reverse-mode tape. Nodes are appended in evaluation order, so the tape is
/// already topologically sorted and backward is a single reverse sweep.
///
/// Parameters not selected as trainable enter the graph as constants: no
/// gradient is computed for them and backward never touches their grad slot.
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, std::size_t self)>;

  explicit Graph(Trainable mode = Trainable::all);
  explicit Graph(std::span<Parameter* const> trainable);

  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  // Leaf for a parameter; repeated calls return the same node.
  Var param(Parameter& p);

  // Fills d(output)/d(p) into the grad slot of every trainable Parameter
  // reachable from output, accumulating onto any existing gradient.
  void backward(Var output);

  // Op-construction interface.
  Var record(Tensor value, std::vector<std::size_t> inputs, BackwardFn backward);
  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  std::span<const double> grad(std::size_t id) const { return nodes_[id].grad; }
  // Gradient accumulator for a node, zero-initialised on first use.
  std::span<double> grad_buffer(std::size_t id);

  std::size_t size() const { return nodes_.size(); }
  bool is_trainable(const Parameter& p) const;

 private:
  struct Node {
    Tensor value;
    std::vector<double> grad;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    Parameter* param = nullptr;
    bool requires_grad = false;
  };

  std::vector<Node> nodes_;
  bool all_trainable_ = true;
  std::unordered_set<const Parameter*> trainable_;
  std::unordered_map<const Parameter*, std::size_t> param_nodes_;
};

inline const Tensor& Var::value() const { return graph_->value(id_); }

// Primitive operations. Elementwise binary ops accept equal shapes, or a
// right operand whose shape equals the left operand's shape without its
// leading axis (broadcast over the batch axis).
Var matmul(Var a, Var b);  // a viewed as [a.dim(0), rest]; b is [rest, n]
Var conv2d(Var input, Var weight, Var bias, std::size_t stride = 1, std::size_t padding = 0);
Var max_pool2d(Var input, std::size_t window, std::size_t stride);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var concat(Var a, Var b);  // along the last axis
Var sigmoid(Var x);
Var tanh(Var x);
Var relu(Var x);
Var softmax(Var x);  // over the last axis
// Natural log of max(x, floor); gradient is zero where x < floor.
Var log(Var x, double floor = 0.0);
Var sum(Var x);   // -> shape [1]
Var mean(Var x);  // -> shape [1]
// Euclidean distance over the last axis; result drops that axis (shape [1]
// for rank-1 operands). The subgradient at zero distance is zero.
Var distance(Var a, Var b);
// max(x, 0); same function as relu, named for hinge terms in losses.
inline Var clamp_min_zero(Var x) { return relu(x); }

// Helpers built from the primitives above.
Var scale(Var x, double factor);
Var filled_like(Var x, double value);  // constant of x's shape

}  // namespace md
