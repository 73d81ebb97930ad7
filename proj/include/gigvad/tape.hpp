#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gigvad/errors.hpp"
#include "gigvad/tensor.hpp"

namespace gigvad {

/// Handle to a value recorded on a Tape.
struct Var {
  std::size_t id = 0;
};

/// Reverse-mode gradient tape.
///
/// Every primitive op appends one node holding its output value and a
/// backward closure. backward() replays the closures in exact reverse
/// order; gradients of a value feeding several consumers accumulate.
///
/// Selection ops (max, top-k, top-p) report the gap between the last
/// selected candidate and the best rejected one through note_margin(); the
/// smallest gap seen tells callers how close the evaluation point sits to a
/// subgradient discontinuity.
class Tape {
 public:
  using Backward = std::function<void(Tape&, const Tensor& upstream)>;

  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}

  bool grad_enabled() const noexcept { return grad_enabled_; }

  Var leaf(Tensor value) { return push(std::move(value), {}); }

  /// Records an op output. The backward closure is dropped when gradients
  /// are disabled.
  Var record(Tensor value, Backward backward, const std::string& op = "op") {
    if (!value.all_finite()) throw NumericError(op + " produced a non-finite value");
    return push(std::move(value), grad_enabled_ ? std::move(backward) : Backward{});
  }

  const Tensor& value(Var v) const { return node(v).value; }

  /// Gradient of the last backward() target with respect to v. Zero when v
  /// did not influence the target.
  Tensor grad(Var v) const {
    const Node& n = node(v);
    return n.grad ? *n.grad : Tensor::zeros_like(n.value);
  }

  /// Adds `g` into the gradient slot of `v`.
  void accumulate(Var v, const Tensor& g) {
    Node& n = node(v);
    if (g.shape() != n.value.shape()) {
      throw DimensionError("gradient shape " + shape_string(g.shape()) +
                           " does not match value shape " + shape_string(n.value.shape()));
    }
    if (!n.grad) {
      n.grad = g;
      return;
    }
    auto dst = n.grad->data();
    auto src = g.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }

  /// Seeds d(target)/d(target) = 1 and replays every node in reverse.
  void backward(Var target) {
    if (!grad_enabled_) throw Error("backward() on a tape with gradients disabled");
    const Node& t = node(target);
    if (t.value.size() != 1) {
      throw DimensionError("backward() target must be a scalar, got " +
                           shape_string(t.value.shape()));
    }
    for (Node& n : nodes_) n.grad.reset();
    nodes_[target.id].grad = Tensor(t.value.shape(), 1.0);
    for (std::size_t i = target.id + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!n.backward || !n.grad) continue;
      const Tensor upstream = *n.grad;
      n.backward(*this, upstream);
    }
  }

  void note_margin(double gap) {
    if (gap < min_margin_) min_margin_ = gap;
  }
  /// Smallest selection gap recorded so far; +inf when no selection had a
  /// rejected candidate.
  double min_selection_margin() const noexcept { return min_margin_; }

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Backward backward;
    std::optional<Tensor> grad;
  };

  Var push(Tensor value, Backward backward) {
    nodes_.push_back(Node{std::move(value), std::move(backward), std::nullopt});
    return Var{nodes_.size() - 1};
  }
  Node& node(Var v) {
    if (v.id >= nodes_.size()) throw Error("Var does not belong to this tape");
    return nodes_[v.id];
  }
  const Node& node(Var v) const {
    if (v.id >= nodes_.size()) throw Error("Var does not belong to this tape");
    return nodes_[v.id];
  }

  bool grad_enabled_;
  std::vector<Node> nodes_;
  double min_margin_ = std::numeric_limits<double>::infinity();
};

}  // namespace gigvad
