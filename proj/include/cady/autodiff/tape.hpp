#pragma once

// Reverse-mode automatic differentiation over 2-D tensors.
//
// A Tape records primitives in execution order; each node stores its forward
// value and the indices of its parents, so the node list is topologically
// sorted by construction. backward() walks it once in reverse.
//
// Binary primitives (add, sub, mul) broadcast their SECOND operand when it is
// (rows x 1), (1 x cols) or (1 x 1). That covers bias addition, per-column
// masks and scalar parameters without general broadcasting.

#include <cstdint>
#include <string_view>
#include <vector>

#include "cady/autodiff/tensor.hpp"

namespace cady::ad {

enum class OpKind : std::uint8_t {
  Leaf,
  Constant,
  MatMul,
  Add,
  Sub,
  Mul,
  Neg,
  Scale,
  Tanh,
  Softplus,
  Exp,
  Log,
  Square,
  Sum,
  Mean,
  MaxConst,
  MinConst,
  MaskMul,
  SliceRow,
};

std::string_view op_name(OpKind op);

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::uint32_t id) : tape_(tape), id_(id) {}

  Tape* tape() const { return tape_; }
  std::uint32_t id() const { return id_; }
  const Tensor& value() const;
  Shape shape() const { return value().shape(); }

 private:
  Tape* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

class Gradients {
 public:
  explicit Gradients(std::vector<Tensor> grads) : grads_(std::move(grads)) {}
  /// Gradient of the seeded output w.r.t. v. Zero tensor if v does not
  /// influence the output.
  const Tensor& operator[](Var v) const { return grads_.at(v.id()); }

 private:
  std::vector<Tensor> grads_;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Differentiable leaf (input or parameter).
  Var input(Tensor value);
  /// Non-differentiable leaf.
  Var constant(Tensor value);

  const Tensor& value(Var v) const { return nodes_[v.id()].value; }
  std::size_t size() const { return nodes_.size(); }
  OpKind op(std::size_t id) const { return nodes_[id].op; }

  /// When enabled, every recorded value is checked for NaN/Inf and the
  /// offending primitive is named in the exception.
  void set_checked(bool on) { checked_ = on; }

  /// Reverse pass from `output` seeded with `seed` (same shape as output).
  Gradients backward(Var output, const Tensor& seed) const;

 private:
  struct Node {
    OpKind op = OpKind::Leaf;
    std::int32_t a = -1;
    std::int32_t b = -1;
    double param = 0.0;
    bool requires_grad = false;
    Tensor value;
    Tensor aux;  // mask for MaskMul
  };

  static Node make_node(OpKind op, std::int32_t a = -1, std::int32_t b = -1) {
    Node n;
    n.op = op;
    n.a = a;
    n.b = b;
    return n;
  }
  Var push(Node node);
  const Node& node(Var v) const { return nodes_[v.id()]; }

  friend Var matmul(Var, Var);
  friend Var binary(OpKind, Var, Var);
  friend Var unary(OpKind, Var, double);
  friend Var mask_mul(Var, const Tensor&);
  friend Var slice_row(Var, std::size_t);

  std::vector<Node> nodes_;
  bool checked_ = false;
};

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var neg(Var a);
Var scale(Var a, double k);
Var tanh(Var a);
Var softplus(Var a);
Var exp(Var a);
Var log(Var a);
Var square(Var a);
Var sum(Var a);
Var mean(Var a);
Var max_const(Var a, double c);
Var min_const(Var a, double c);
/// Elementwise product with a constant mask (broadcast like binary ops).
Var mask_mul(Var a, const Tensor& mask);
/// Row r of a as a (1 x cols) tensor.
Var slice_row(Var a, std::size_t r);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }
inline Var operator-(Var a) { return neg(a); }

// Numerically stable scalar helpers shared with the tape-free inference path.
double softplus(double x);
double sigmoid(double x);

}  // namespace cady::ad
