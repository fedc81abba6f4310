#include "cady/autodiff/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cady/simd/kernels.hpp"

namespace cady::ad {

std::string_view op_name(OpKind op) {
  switch (op) {
    case OpKind::Leaf: return "leaf";
    case OpKind::Constant: return "constant";
    case OpKind::MatMul: return "matmul";
    case OpKind::Add: return "add";
    case OpKind::Sub: return "sub";
    case OpKind::Mul: return "mul";
    case OpKind::Neg: return "neg";
    case OpKind::Scale: return "scale";
    case OpKind::Tanh: return "tanh";
    case OpKind::Softplus: return "softplus";
    case OpKind::Exp: return "exp";
    case OpKind::Log: return "log";
    case OpKind::Square: return "square";
    case OpKind::Sum: return "sum";
    case OpKind::Mean: return "mean";
    case OpKind::MaxConst: return "max_const";
    case OpKind::MinConst: return "min_const";
    case OpKind::MaskMul: return "mask_mul";
    case OpKind::SliceRow: return "slice_row";
  }
  return "?";
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

const Tensor& Var::value() const { return tape_->value(*this); }

namespace {

[[noreturn]] void shape_error(OpKind op, std::string_view expected, Shape a, Shape b) {
  throw std::invalid_argument(std::string(op_name(op)) + ": shape mismatch, expected " +
                              std::string(expected) + ", got " + to_string(a) + " and " +
                              to_string(b));
}

void check_same_tape(OpKind op, Var a, Var b) {
  if (a.tape() == nullptr || a.tape() != b.tape()) {
    throw std::invalid_argument(std::string(op_name(op)) + ": operands live on different tapes");
  }
}

// Second operand broadcast: same shape, column (rows x 1), row (1 x cols) or scalar.
bool broadcastable(Shape a, Shape b) {
  return (b.rows == a.rows || b.rows == 1) && (b.cols == a.cols || b.cols == 1);
}

inline std::size_t bidx(Shape b, std::size_t r, std::size_t c) {
  return (b.rows == 1 ? 0 : r) * b.cols + (b.cols == 1 ? 0 : c);
}

// Sum `g` (shape a) down to shape b, accumulating into out.
void reduce_into(const Tensor& g, Shape b, Tensor& out) {
  const Shape a = g.shape();
  if (a == b) {
    for (std::size_t i = 0; i < g.size(); ++i) out[i] += g[i];
    return;
  }
  for (std::size_t r = 0; r < a.rows; ++r) {
    for (std::size_t c = 0; c < a.cols; ++c) out[bidx(b, r, c)] += g(r, c);
  }
}

}  // namespace

Var Tape::push(Node node) {
  if (checked_ && !node.value.all_finite()) {
    throw std::domain_error(std::string(op_name(node.op)) + ": produced non-finite value");
  }
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::input(Tensor value) {
  auto n = Tape::make_node(OpKind::Leaf);
  n.requires_grad = true;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::constant(Tensor value) {
  auto n = Tape::make_node(OpKind::Constant);
  n.value = std::move(value);
  return push(std::move(n));
}

Var matmul(Var a, Var b) {
  check_same_tape(OpKind::MatMul, a, b);
  Tape& t = *a.tape();
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  if (av.cols() != bv.rows()) shape_error(OpKind::MatMul, "(m x k) * (k x n)", av.shape(), bv.shape());
  auto n = Tape::make_node(OpKind::MatMul, static_cast<std::int32_t>(a.id()), static_cast<std::int32_t>(b.id()));
  n.value = Tensor(av.rows(), bv.cols());
  simd::kernels().gemm_nn(av.data().data(), bv.data().data(), n.value.data().data(), av.rows(),
                          av.cols(), bv.cols());
  n.requires_grad = t.node(a).requires_grad || t.node(b).requires_grad;
  return t.push(std::move(n));
}

Var binary(OpKind op, Var a, Var b) {
  check_same_tape(op, a, b);
  Tape& t = *a.tape();
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  const Shape as = av.shape(), bs = bv.shape();
  if (!broadcastable(as, bs)) shape_error(op, "second operand equal or broadcastable to first", as, bs);
  auto n = Tape::make_node(op, static_cast<std::int32_t>(a.id()), static_cast<std::int32_t>(b.id()));
  n.value = Tensor(as.rows, as.cols);
  for (std::size_t r = 0; r < as.rows; ++r) {
    for (std::size_t c = 0; c < as.cols; ++c) {
      const double x = av(r, c), y = bv[bidx(bs, r, c)];
      double v = 0.0;
      switch (op) {
        case OpKind::Add: v = x + y; break;
        case OpKind::Sub: v = x - y; break;
        case OpKind::Mul: v = x * y; break;
        default: throw std::logic_error("binary: bad op");
      }
      n.value(r, c) = v;
    }
  }
  n.requires_grad = t.node(a).requires_grad || t.node(b).requires_grad;
  return t.push(std::move(n));
}

Var unary(OpKind op, Var a, double param) {
  if (a.tape() == nullptr) throw std::invalid_argument(std::string(op_name(op)) + ": detached operand");
  Tape& t = *a.tape();
  const Tensor& av = t.value(a);
  auto n = Tape::make_node(op, static_cast<std::int32_t>(a.id()));
  n.param = param;
  if (op == OpKind::Sum || op == OpKind::Mean) {
    double s = 0.0;
    for (double x : av.data()) s += x;
    if (op == OpKind::Mean) {
      if (av.size() == 0) throw std::invalid_argument("mean: empty tensor");
      s /= static_cast<double>(av.size());
    }
    n.value = Tensor::scalar(s);
  } else {
    n.value = Tensor(av.rows(), av.cols());
    for (std::size_t i = 0; i < av.size(); ++i) {
      const double x = av[i];
      double v = 0.0;
      switch (op) {
        case OpKind::Neg: v = -x; break;
        case OpKind::Scale: v = param * x; break;
        case OpKind::Tanh: v = std::tanh(x); break;
        case OpKind::Softplus: v = softplus(x); break;
        case OpKind::Exp: v = std::exp(x); break;
        case OpKind::Log: v = std::log(x); break;
        case OpKind::Square: v = x * x; break;
        case OpKind::MaxConst: v = std::max(x, param); break;
        case OpKind::MinConst: v = std::min(x, param); break;
        default: throw std::logic_error("unary: bad op");
      }
      n.value[i] = v;
    }
  }
  n.requires_grad = t.node(a).requires_grad;
  return t.push(std::move(n));
}

Var mask_mul(Var a, const Tensor& mask) {
  Tape& t = *a.tape();
  const Tensor& av = t.value(a);
  if (!broadcastable(av.shape(), mask.shape())) {
    shape_error(OpKind::MaskMul, "mask equal or broadcastable to operand", av.shape(), mask.shape());
  }
  auto n = Tape::make_node(OpKind::MaskMul, static_cast<std::int32_t>(a.id()));
  n.value = Tensor(av.rows(), av.cols());
  for (std::size_t r = 0; r < av.rows(); ++r) {
    for (std::size_t c = 0; c < av.cols(); ++c) {
      n.value(r, c) = av(r, c) * mask[bidx(mask.shape(), r, c)];
    }
  }
  n.aux = mask;
  n.requires_grad = t.node(a).requires_grad;
  return t.push(std::move(n));
}

Var slice_row(Var a, std::size_t r) {
  Tape& t = *a.tape();
  const Tensor& av = t.value(a);
  if (r >= av.rows()) {
    throw std::out_of_range("slice_row: row " + std::to_string(r) + " outside " + to_string(av.shape()));
  }
  auto n = Tape::make_node(OpKind::SliceRow, static_cast<std::int32_t>(a.id()));
  n.param = static_cast<double>(r);
  n.value = Tensor(1, av.cols());
  for (std::size_t c = 0; c < av.cols(); ++c) n.value[c] = av(r, c);
  n.requires_grad = t.node(a).requires_grad;
  return t.push(std::move(n));
}

Var add(Var a, Var b) { return binary(OpKind::Add, a, b); }
Var sub(Var a, Var b) { return binary(OpKind::Sub, a, b); }
Var mul(Var a, Var b) { return binary(OpKind::Mul, a, b); }
Var neg(Var a) { return unary(OpKind::Neg, a, 0.0); }
Var scale(Var a, double k) { return unary(OpKind::Scale, a, k); }
Var tanh(Var a) { return unary(OpKind::Tanh, a, 0.0); }
Var softplus(Var a) { return unary(OpKind::Softplus, a, 0.0); }
Var exp(Var a) { return unary(OpKind::Exp, a, 0.0); }
Var log(Var a) { return unary(OpKind::Log, a, 0.0); }
Var square(Var a) { return unary(OpKind::Square, a, 0.0); }
Var sum(Var a) { return unary(OpKind::Sum, a, 0.0); }
Var mean(Var a) { return unary(OpKind::Mean, a, 0.0); }
Var max_const(Var a, double c) { return unary(OpKind::MaxConst, a, c); }
Var min_const(Var a, double c) { return unary(OpKind::MinConst, a, c); }

Gradients Tape::backward(Var output, const Tensor& seed) const {
  if (output.tape() != this) throw std::invalid_argument("backward: output is not on this tape");
  const Tensor& out = value(output);
  if (seed.shape() != out.shape()) {
    throw std::invalid_argument("backward: seed shape " + to_string(seed.shape()) +
                                " does not match output " + to_string(out.shape()));
  }
  const auto& k = simd::kernels();
  std::vector<Tensor> grads(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    grads[i] = Tensor(nodes_[i].value.rows(), nodes_[i].value.cols());
  }
  grads[output.id()] = seed;

  for (std::size_t id = output.id() + 1; id-- > 0;) {
    const Node& n = nodes_[id];
    if (!n.requires_grad) continue;
    const Tensor& g = grads[id];
    switch (n.op) {
      case OpKind::Leaf:
      case OpKind::Constant:
        break;
      case OpKind::MatMul: {
        const Node& na = nodes_[n.a];
        const Node& nb = nodes_[n.b];
        const std::size_t m = na.value.rows(), kk = na.value.cols(), nn = nb.value.cols();
        if (na.requires_grad) {
          k.gemm_nt(g.data().data(), nb.value.data().data(), grads[n.a].data().data(), m, nn, kk);
        }
        if (nb.requires_grad) {
          k.gemm_tn(na.value.data().data(), g.data().data(), grads[n.b].data().data(), kk, m, nn);
        }
        break;
      }
      case OpKind::Add:
      case OpKind::Sub:
      case OpKind::Mul: {
        const Node& na = nodes_[n.a];
        const Node& nb = nodes_[n.b];
        const Shape bs = nb.value.shape();
        if (n.op == OpKind::Mul) {
          if (na.requires_grad) {
            Tensor& ga = grads[n.a];
            for (std::size_t r = 0; r < g.rows(); ++r)
              for (std::size_t c = 0; c < g.cols(); ++c) ga(r, c) += g(r, c) * nb.value[bidx(bs, r, c)];
          }
          if (nb.requires_grad) {
            Tensor& gb = grads[n.b];
            for (std::size_t r = 0; r < g.rows(); ++r)
              for (std::size_t c = 0; c < g.cols(); ++c) gb[bidx(bs, r, c)] += g(r, c) * na.value(r, c);
          }
        } else {
          if (na.requires_grad) reduce_into(g, na.value.shape(), grads[n.a]);
          if (nb.requires_grad) {
            if (n.op == OpKind::Add) {
              reduce_into(g, bs, grads[n.b]);
            } else {
              Tensor& gb = grads[n.b];
              for (std::size_t r = 0; r < g.rows(); ++r)
                for (std::size_t c = 0; c < g.cols(); ++c) gb[bidx(bs, r, c)] -= g(r, c);
            }
          }
        }
        break;
      }
      case OpKind::MaskMul: {
        Tensor& ga = grads[n.a];
        const Shape ms = n.aux.shape();
        for (std::size_t r = 0; r < g.rows(); ++r)
          for (std::size_t c = 0; c < g.cols(); ++c) ga(r, c) += g(r, c) * n.aux[bidx(ms, r, c)];
        break;
      }
      case OpKind::SliceRow: {
        Tensor& ga = grads[n.a];
        const auto row = static_cast<std::size_t>(n.param);
        for (std::size_t c = 0; c < g.cols(); ++c) ga(row, c) += g[c];
        break;
      }
      case OpKind::Sum:
      case OpKind::Mean: {
        Tensor& ga = grads[n.a];
        double gs = g[0];
        if (n.op == OpKind::Mean) gs /= static_cast<double>(ga.size());
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += gs;
        break;
      }
      default: {
        const Tensor& x = nodes_[n.a].value;
        Tensor& ga = grads[n.a];
        for (std::size_t i = 0; i < x.size(); ++i) {
          double d = 0.0;
          switch (n.op) {
            case OpKind::Neg: d = -1.0; break;
            case OpKind::Scale: d = n.param; break;
            case OpKind::Tanh: d = 1.0 - n.value[i] * n.value[i]; break;
            case OpKind::Softplus: d = sigmoid(x[i]); break;
            case OpKind::Exp: d = n.value[i]; break;
            case OpKind::Log: d = 1.0 / x[i]; break;
            case OpKind::Square: d = 2.0 * x[i]; break;
            case OpKind::MaxConst: d = x[i] > n.param ? 1.0 : 0.0; break;
            case OpKind::MinConst: d = x[i] < n.param ? 1.0 : 0.0; break;
            default: throw std::logic_error("backward: unhandled op");
          }
          ga[i] += g[i] * d;
        }
        break;
      }
    }
  }
  return Gradients(std::move(grads));
}

}  // namespace cady::ad
