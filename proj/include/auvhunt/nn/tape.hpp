#pragma once

#include <functional>
#include <initializer_list>
#include <utility>
#include <vector>

#include "auvhunt/nn/tensor.hpp"

namespace auvhunt::nn {

template <typename T>
class BasicTape;

/// Handle to a node recorded on a tape.
template <typename T>
struct BasicVar {
  BasicTape<T>* tape = nullptr;
  std::size_t id = 0;

  const BasicTensor<T>& value() const { return tape->value(*this); }
  const Shape& shape() const { return value().shape(); }
};

/// Reverse-mode tape. Nodes are appended in evaluation order, so reverse
/// insertion order is a valid topological order for backward.
///
/// A tape constructed with `recording = false` stores values only; this is
/// the inference path.
template <typename T>
class BasicTape {
 public:
  using TensorT = BasicTensor<T>;
  using Var = BasicVar<T>;
  using BackwardFn = std::function<void(BasicTape&, const TensorT& out_grad)>;

  explicit BasicTape(bool recording = true) : recording_(recording) {}
  BasicTape(const BasicTape&) = delete;
  BasicTape& operator=(const BasicTape&) = delete;

  bool recording() const { return recording_; }
  std::size_t size() const { return nodes_.size(); }

  Var constant(TensorT value) { return push(std::move(value), false, nullptr); }
  /// Leaf that receives a gradient when the tape records.
  Var variable(TensorT value) { return push(std::move(value), recording_, nullptr); }

  const TensorT& value(Var v) const { return nodes_[v.id].value; }
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }

  /// Gradient of the last backward() target with respect to `v`; zeros if
  /// no gradient flowed there.
  TensorT grad(Var v) const {
    const auto& node = nodes_[v.id];
    if (node.grad.empty()) return TensorT(node.value.shape());
    return node.grad;
  }

  /// Records an op output. `fn` runs during backward only if some input
  /// requires a gradient.
  Var record(TensorT value, std::initializer_list<Var> inputs, BackwardFn fn) {
    bool needs = false;
    if (recording_) {
      for (const Var& in : inputs) needs = needs || nodes_[in.id].requires_grad;
    }
    return push(std::move(value), needs, needs ? std::move(fn) : nullptr);
  }
  Var record(TensorT value, const std::vector<Var>& inputs, BackwardFn fn) {
    bool needs = false;
    if (recording_) {
      for (const Var& in : inputs) needs = needs || nodes_[in.id].requires_grad;
    }
    return push(std::move(value), needs, needs ? std::move(fn) : nullptr);
  }

  /// Gradient accumulator for node `v`, zero-initialized on first use.
  /// Returns nullptr when `v` does not take gradients.
  TensorT* accumulator(Var v) {
    auto& node = nodes_[v.id];
    if (!node.requires_grad) return nullptr;
    if (node.grad.empty()) node.grad = TensorT(node.value.shape());
    return &node.grad;
  }

  /// Drops every node recorded after the first `size` nodes. Handles to the
  /// dropped nodes become invalid.
  void rewind(std::size_t size) {
    if (size < nodes_.size()) nodes_.resize(size);
  }

  void backward(Var loss) {
    if (!recording_) throw ValidationError("backward: tape is not recording");
    const auto& out = nodes_[loss.id].value;
    if (out.size() != 1) {
      throw ShapeError("backward: loss must be a scalar, got shape " +
                       shape_string(out.shape()));
    }
    for (auto& node : nodes_) node.grad = TensorT();
    if (!nodes_[loss.id].requires_grad) return;
    nodes_[loss.id].grad = TensorT(out.shape(), T{1});
    for (std::size_t i = loss.id + 1; i-- > 0;) {
      auto& node = nodes_[i];
      if (node.backward && !node.grad.empty()) node.backward(*this, node.grad);
    }
  }

 private:
  struct Node {
    TensorT value;
    TensorT grad;
    bool requires_grad = false;
    BackwardFn backward;
  };

  Var push(TensorT value, bool requires_grad, BackwardFn fn) {
    nodes_.push_back(Node{std::move(value), TensorT(), requires_grad, std::move(fn)});
    return Var{this, nodes_.size() - 1};
  }

  std::vector<Node> nodes_;
  bool recording_;
};

using Tape = BasicTape<float>;
using Var = BasicVar<float>;

}  // namespace auvhunt::nn
