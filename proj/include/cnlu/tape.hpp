#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "cnlu/tensor.hpp"

namespace cnlu {

// Handle to a value recorded on a Tape.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode tape: an ordered record of executed primitive ops. The
// reverse pass visits ops in exact reverse execution order. Leaves may view
// external tensors (model parameters) so the forward pass never copies them;
// gradient buffers are owned by the tape and allocated on first touch.
//
// A tape serves exactly one forward/backward pass and is not shared across
// threads.
template <typename T>
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, Var)>;

  // Parameter leaf: views `t` (caller keeps it alive), receives a gradient.
  Var leaf(const Tensor<T>& t) {
    nodes_.push_back(Node{Tensor<T>{}, &t, Tensor<T>{}, true, nullptr});
    return Var{static_cast<int>(nodes_.size()) - 1};
  }

  // Constant: owned value, no gradient (embeddings output, teacher logits).
  Var constant(Tensor<T> t) {
    nodes_.push_back(Node{std::move(t), nullptr, Tensor<T>{}, false, nullptr});
    return Var{static_cast<int>(nodes_.size()) - 1};
  }

  // Records an op result together with its backward closure.
  Var push(Tensor<T> value, bool needs_grad, BackwardFn backward) {
    nodes_.push_back(Node{std::move(value), nullptr, Tensor<T>{}, needs_grad,
                          needs_grad ? std::move(backward) : nullptr});
    return Var{static_cast<int>(nodes_.size()) - 1};
  }

  const Tensor<T>& value(Var v) const {
    const Node& n = nodes_[static_cast<size_t>(v.id)];
    return n.external ? *n.external : n.owned;
  }

  bool needs_grad(Var v) const { return nodes_[static_cast<size_t>(v.id)].needs_grad; }

  bool grad_touched(Var v) const { return !nodes_[static_cast<size_t>(v.id)].grad.empty(); }

  // Gradient buffer, zero-initialized to the value's shape on first access.
  Tensor<T>& grad(Var v) {
    Node& n = nodes_[static_cast<size_t>(v.id)];
    if (n.grad.empty()) n.grad = Tensor<T>::zeros(value(v).shape);
    return n.grad;
  }

  // Seeds d(root)/d(root) = 1 and replays the tape backwards. `root` must be
  // scalar. Every parameter leaf ends up with a gradient buffer, possibly
  // all-zero.
  void backward(Var root) {
    if (value(root).size() != 1)
      throw DimensionError("backward root must be scalar, got shape " +
                           shape_str(value(root).shape));
    grad(root).at(0) = T(1);
    for (int i = root.id; i >= 0; --i) {
      Node& n = nodes_[static_cast<size_t>(i)];
      if (n.backward && !n.grad.empty()) n.backward(*this, Var{i});
    }
    for (size_t i = 0; i < nodes_.size(); ++i)
      if (nodes_[i].needs_grad && !nodes_[i].backward && nodes_[i].grad.empty())
        grad(Var{static_cast<int>(i)});
  }

  size_t size() const { return nodes_.size(); }

  // Max-pool decisions in execution order, plus a tie flag. Gradient
  // checking compares these across perturbed evaluations to detect
  // non-differentiable points.
  std::vector<int32_t> pool_choices;
  bool pool_tie = false;

 private:
  struct Node {
    Tensor<T> owned;
    const Tensor<T>* external = nullptr;
    Tensor<T> grad;
    bool needs_grad = false;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
};

}  // namespace cnlu
