#pragma once

// Reverse-mode automatic differentiation over dense tensors.
//
// A Tape records every operation applied to its Vars in execution order, which
// is also a topological order. backward() walks the record in reverse and
// returns the gradient of a scalar root with respect to every recorded node.
//
// Broadcasting is limited to two cases:
//   add / sub / mul   one operand may hold a single element (scalar <-> tensor)
//   add_row           matrix [m, n] plus a vector of n elements applied to every row
// Anything else with mismatched shapes raises ShapeError.
//
// A Tape is not thread-safe; use one per thread.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mlgan/tensor.hpp"

namespace mlgan {

enum class OpKind {
  leaf,
  add,
  sub,
  mul,
  matmul,
  leaky_relu,
  relu,
  tanh,
  sigmoid,
  exp,
  log,
  square,
  abs,
  sqrt,
  softplus,
  sum,
  mean,
  concat_rows,
  add_row,
  scale,
  log_softmax_rows,
  pair_sqdist_sum,
  cross_l1_sum,
  custom,
};

std::string_view op_name(OpKind kind);

class Tape;

/// Handle to a node on a Tape. Cheap to copy; valid while its Tape lives.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class GradientMap {
 public:
  const Tensor& operator[](Var v) const { return grads_.at(v.id()); }
  const Tensor& at(std::size_t node_id) const { return grads_.at(node_id); }
  std::size_t size() const { return grads_.size(); }

 private:
  friend class Tape;
  std::vector<Tensor> grads_;
};

/// Backward rule for Tape::custom. Receives the upstream gradient, the input
/// values and the output value; returns one gradient per input (same shapes).
using VectorJacobianProduct = std::function<std::vector<Tensor>(
    const Tensor& grad_out, std::span<const Tensor* const> inputs, const Tensor& output)>;

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Tensor value, bool requires_grad = true);
  Var constant(Tensor value) { return leaf(std::move(value), false); }

  /// Applies a cataloged op. `param` carries the leaky-relu slope or the scale factor.
  Var apply(OpKind kind, std::span<const Var> inputs, double param = 0.0);

  /// Records an op whose value was computed by the caller and whose backward
  /// rule is supplied explicitly.
  Var custom(std::string name, std::vector<Var> inputs, Tensor value, VectorJacobianProduct vjp);

  /// Gradient of `root` (must hold exactly one element) with respect to every
  /// node. Nodes that do not influence the root receive zeros.
  GradientMap backward(Var root) const;

  const Tensor& value(std::size_t node_id) const { return nodes_.at(node_id).value; }
  OpKind kind(std::size_t node_id) const { return nodes_.at(node_id).kind; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    OpKind kind = OpKind::leaf;
    std::vector<std::size_t> inputs;
    Tensor value;
    double param = 0.0;
    bool requires_grad = false;
    std::shared_ptr<const VectorJacobianProduct> vjp;
    std::string name;
  };

  Var push(Node node);
  void check_owned(Var v, std::string_view op) const;
  void backprop_node(const Node& node, const Tensor& grad, std::vector<Tensor>& grads) const;

  std::vector<Node> nodes_;
};

// Op catalog. Each call appends one node to the operands' tape.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var matmul(Var a, Var b);
Var leaky_relu(Var x, double negative_slope = 0.2);
Var relu(Var x);
Var tanh(Var x);
Var sigmoid(Var x);
Var exp(Var x);
Var log(Var x);
Var square(Var x);
Var abs(Var x);
Var sqrt(Var x);
/// log(1 + e^x), evaluated without overflow.
Var softplus(Var x);
Var sum(Var x);
Var mean(Var x);
Var concat_rows(Var top, Var bottom);
Var add_row(Var matrix, Var row);
Var scale(Var x, double factor);
Var log_softmax_rows(Var logits);
/// Sum over unordered row pairs i < j of ||x_i - x_j||^2.
Var pair_sqdist_sum(Var x);
/// Sum over every (i, j) of ||a_i - b_j||_1.
Var cross_l1_sum(Var a, Var b);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }
inline Var operator*(double s, Var x) { return scale(x, s); }

}  // namespace mlgan
