#include "mlgan/tape.hpp"

#include <cmath>
#include <string>

#include "mlgan/errors.hpp"
#include "mlgan/kernels.hpp"

namespace mlgan {

namespace {

namespace kp = kernels::parallel;

inline double sign(double v) { return (v > 0.0) - (v < 0.0); }

inline double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double stable_softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

[[noreturn]] void shape_mismatch(OpKind kind, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op_name(kind)) + ": shape mismatch " + shape_string(a) + " vs " + shape_string(b));
}

void require_rank2(OpKind kind, const Tensor& t) {
  if (t.rank() != 2) throw ShapeError(std::string(op_name(kind)) + ": expected a matrix, got " + shape_string(t.shape()));
}

template <class F>
Tensor map(const Tensor& x, F f) {
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i]);
  return out;
}

// Result of a binary elementwise op with the scalar broadcast rule.
Tensor binary(OpKind kind, const Tensor& a, const Tensor& b) {
  const bool same = a.shape() == b.shape();
  if (!same && a.size() != 1 && b.size() != 1) shape_mismatch(kind, a.shape(), b.shape());
  const Tensor& big = (same || b.size() == 1) ? a : b;
  Tensor out(big.shape());
  const bool a_bcast = !same && a.size() == 1 && big.size() != 1;
  const bool b_bcast = !same && !a_bcast && b.size() == 1;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x = a_bcast ? a[0] : a[i];
    const double y = b_bcast ? b[0] : b[i];
    switch (kind) {
      case OpKind::add: out[i] = x + y; break;
      case OpKind::sub: out[i] = x - y; break;
      default: out[i] = x * y; break;
    }
  }
  return out;
}

// Accumulates `g` (shaped like the op output) into the gradient slot of an
// operand, reducing to one element when the operand was broadcast.
void accumulate(Tensor& slot, const Tensor& operand, const Tensor& g, double factor = 1.0) {
  if (slot.size() == 0) slot = Tensor(operand.shape());
  if (operand.size() == g.size()) {
    for (std::size_t i = 0; i < g.size(); ++i) slot[i] += factor * g[i];
  } else {
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += g[i];
    slot[0] += factor * s;
  }
}

void ensure(Tensor& slot, const Shape& shape) {
  if (slot.size() == 0) slot = Tensor(shape);
}

}  // namespace

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::leaf: return "leaf";
    case OpKind::add: return "add";
    case OpKind::sub: return "sub";
    case OpKind::mul: return "mul";
    case OpKind::matmul: return "matmul";
    case OpKind::leaky_relu: return "leaky_relu";
    case OpKind::relu: return "relu";
    case OpKind::tanh: return "tanh";
    case OpKind::sigmoid: return "sigmoid";
    case OpKind::exp: return "exp";
    case OpKind::log: return "log";
    case OpKind::square: return "square";
    case OpKind::abs: return "abs";
    case OpKind::sqrt: return "sqrt";
    case OpKind::softplus: return "softplus";
    case OpKind::sum: return "sum";
    case OpKind::mean: return "mean";
    case OpKind::concat_rows: return "concat_rows";
    case OpKind::add_row: return "add_row";
    case OpKind::scale: return "scale";
    case OpKind::log_softmax_rows: return "log_softmax_rows";
    case OpKind::pair_sqdist_sum: return "pair_sqdist_sum";
    case OpKind::cross_l1_sum: return "cross_l1_sum";
    case OpKind::custom: return "custom";
  }
  return "unknown";
}

const Tensor& Var::value() const {
  if (!tape_) throw std::logic_error("value() on an unbound Var");
  return tape_->value(id_);
}

Var Tape::push(Node node) {
  if (!node.value.all_finite()) {
    const std::string what = node.kind == OpKind::custom ? node.name : std::string(op_name(node.kind));
    throw NonFiniteError(what + ": produced a non-finite value");
  }
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

void Tape::check_owned(Var v, std::string_view op) const {
  if (!v.valid() || &v.tape() != this || v.id() >= nodes_.size())
    throw std::invalid_argument(std::string(op) + ": operand does not belong to this tape");
}

Var Tape::leaf(Tensor value, bool requires_grad) {
  Node n;
  n.kind = OpKind::leaf;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  return push(std::move(n));
}

Var Tape::custom(std::string name, std::vector<Var> inputs, Tensor value, VectorJacobianProduct vjp) {
  Node n;
  n.kind = OpKind::custom;
  n.name = std::move(name);
  for (Var v : inputs) {
    check_owned(v, n.name);
    n.inputs.push_back(v.id());
    n.requires_grad = n.requires_grad || nodes_[v.id()].requires_grad;
  }
  n.value = std::move(value);
  n.vjp = std::make_shared<const VectorJacobianProduct>(std::move(vjp));
  return push(std::move(n));
}

Var Tape::apply(OpKind kind, std::span<const Var> inputs, double param) {
  const std::size_t arity = [&] {
    switch (kind) {
      case OpKind::add:
      case OpKind::sub:
      case OpKind::mul:
      case OpKind::matmul:
      case OpKind::concat_rows:
      case OpKind::add_row:
      case OpKind::cross_l1_sum: return std::size_t{2};
      case OpKind::leaf:
      case OpKind::custom: throw std::invalid_argument(std::string(op_name(kind)) + ": not applicable via apply()");
      default: return std::size_t{1};
    }
  }();
  if (inputs.size() != arity)
    throw std::invalid_argument(std::string(op_name(kind)) + ": expected " + std::to_string(arity) + " operands");

  Node n;
  n.kind = kind;
  n.param = param;
  for (Var v : inputs) {
    check_owned(v, op_name(kind));
    n.inputs.push_back(v.id());
    n.requires_grad = n.requires_grad || nodes_[v.id()].requires_grad;
  }
  const Tensor& a = nodes_[n.inputs[0]].value;
  const Tensor* b = arity == 2 ? &nodes_[n.inputs[1]].value : nullptr;

  switch (kind) {
    case OpKind::add:
    case OpKind::sub:
    case OpKind::mul: n.value = binary(kind, a, *b); break;
    case OpKind::matmul: {
      require_rank2(kind, a);
      require_rank2(kind, *b);
      if (a.cols() != b->rows()) shape_mismatch(kind, a.shape(), b->shape());
      n.value = Tensor({a.rows(), b->cols()});
      kp::matmul(a.data(), b->data(), n.value.data(), a.rows(), a.cols(), b->cols());
      break;
    }
    case OpKind::leaky_relu: n.value = map(a, [s = param](double x) { return x > 0.0 ? x : s * x; }); break;
    case OpKind::relu: n.value = map(a, [](double x) { return x > 0.0 ? x : 0.0; }); break;
    case OpKind::tanh: n.value = map(a, [](double x) { return std::tanh(x); }); break;
    case OpKind::sigmoid: n.value = map(a, stable_sigmoid); break;
    case OpKind::exp: n.value = map(a, [](double x) { return std::exp(x); }); break;
    case OpKind::log:
      for (double x : a.data())
        if (!(x > 0.0)) throw DomainError("log: input " + std::to_string(x) + " is not positive");
      n.value = map(a, [](double x) { return std::log(x); });
      break;
    case OpKind::square: n.value = map(a, [](double x) { return x * x; }); break;
    case OpKind::abs: n.value = map(a, [](double x) { return std::abs(x); }); break;
    case OpKind::sqrt:
      for (double x : a.data())
        if (x < 0.0) throw DomainError("sqrt: input " + std::to_string(x) + " is negative");
      n.value = map(a, [](double x) { return std::sqrt(x); });
      break;
    case OpKind::softplus: n.value = map(a, stable_softplus); break;
    case OpKind::sum:
    case OpKind::mean: {
      double s = 0.0;
      for (double x : a.data()) s += x;
      n.value = Tensor::scalar(kind == OpKind::sum ? s : s / static_cast<double>(a.size()));
      break;
    }
    case OpKind::concat_rows: {
      require_rank2(kind, a);
      require_rank2(kind, *b);
      if (a.cols() != b->cols()) shape_mismatch(kind, a.shape(), b->shape());
      std::vector<double> data(a.data().begin(), a.data().end());
      data.insert(data.end(), b->data().begin(), b->data().end());
      n.value = Tensor({a.rows() + b->rows(), a.cols()}, std::move(data));
      break;
    }
    case OpKind::add_row: {
      require_rank2(kind, a);
      const bool row_shape = (b->rank() == 1) || (b->rank() == 2 && b->rows() == 1);
      if (!row_shape || b->size() != a.cols()) shape_mismatch(kind, a.shape(), b->shape());
      n.value = a;
      const std::size_t cols = a.cols();
      for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < cols; ++c) n.value[r * cols + c] += (*b)[c];
      break;
    }
    case OpKind::scale: n.value = map(a, [s = param](double x) { return s * x; }); break;
    case OpKind::log_softmax_rows: {
      require_rank2(kind, a);
      n.value = Tensor(a.shape());
      const std::size_t cols = a.cols();
      for (std::size_t r = 0; r < a.rows(); ++r) {
        double mx = a[r * cols];
        for (std::size_t c = 1; c < cols; ++c) mx = std::max(mx, a[r * cols + c]);
        double s = 0.0;
        for (std::size_t c = 0; c < cols; ++c) s += std::exp(a[r * cols + c] - mx);
        const double lse = mx + std::log(s);
        for (std::size_t c = 0; c < cols; ++c) n.value[r * cols + c] = a[r * cols + c] - lse;
      }
      break;
    }
    case OpKind::pair_sqdist_sum:
      require_rank2(kind, a);
      n.value = Tensor::scalar(kp::pair_sqdist_sum(a.data(), a.rows(), a.cols()));
      break;
    case OpKind::cross_l1_sum:
      require_rank2(kind, a);
      require_rank2(kind, *b);
      if (a.cols() != b->cols()) shape_mismatch(kind, a.shape(), b->shape());
      n.value = Tensor::scalar(kp::cross_l1_sum(a.data(), a.rows(), b->data(), b->rows(), a.cols()));
      break;
    case OpKind::leaf:
    case OpKind::custom: break;
  }
  return push(std::move(n));
}

void Tape::backprop_node(const Node& node, const Tensor& g, std::vector<Tensor>& grads) const {
  const std::size_t ia = node.inputs.empty() ? 0 : node.inputs[0];
  const Tensor& a = nodes_[ia].value;
  const Tensor& y = node.value;
  auto wants = [&](std::size_t input) { return nodes_[input].requires_grad; };

  auto unary = [&](auto dydx) {
    if (!wants(ia)) return;
    ensure(grads[ia], a.shape());
    Tensor& ga = grads[ia];
    for (std::size_t i = 0; i < a.size(); ++i) ga[i] += g[i] * dydx(a[i], y[i]);
  };

  switch (node.kind) {
    case OpKind::leaf: break;
    case OpKind::add:
    case OpKind::sub: {
      const std::size_t ib = node.inputs[1];
      if (wants(ia)) accumulate(grads[ia], a, g);
      if (wants(ib)) accumulate(grads[ib], nodes_[ib].value, g, node.kind == OpKind::sub ? -1.0 : 1.0);
      break;
    }
    case OpKind::mul: {
      const std::size_t ib = node.inputs[1];
      const Tensor& b = nodes_[ib].value;
      if (wants(ia)) {
        Tensor part(g.shape());
        for (std::size_t i = 0; i < g.size(); ++i) part[i] = g[i] * (b.size() == 1 ? b[0] : b[i]);
        accumulate(grads[ia], a, part);
      }
      if (wants(ib)) {
        Tensor part(g.shape());
        for (std::size_t i = 0; i < g.size(); ++i) part[i] = g[i] * (a.size() == 1 ? a[0] : a[i]);
        accumulate(grads[ib], b, part);
      }
      break;
    }
    case OpKind::matmul: {
      const std::size_t ib = node.inputs[1];
      const Tensor& b = nodes_[ib].value;
      const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
      if (wants(ia)) {
        Tensor tmp({m, k});
        kp::matmul_a_bt(g.data(), b.data(), tmp.data(), m, n, k);
        accumulate(grads[ia], a, tmp);
      }
      if (wants(ib)) {
        Tensor tmp({k, n});
        kp::matmul_at_b(a.data(), g.data(), tmp.data(), k, m, n);
        accumulate(grads[ib], b, tmp);
      }
      break;
    }
    case OpKind::leaky_relu: unary([s = node.param](double x, double) { return x > 0.0 ? 1.0 : s; }); break;
    case OpKind::relu: unary([](double x, double) { return x > 0.0 ? 1.0 : 0.0; }); break;
    case OpKind::tanh: unary([](double, double t) { return 1.0 - t * t; }); break;
    case OpKind::sigmoid: unary([](double, double s) { return s * (1.0 - s); }); break;
    case OpKind::exp: unary([](double, double e) { return e; }); break;
    case OpKind::log: unary([](double x, double) { return 1.0 / x; }); break;
    case OpKind::square: unary([](double x, double) { return 2.0 * x; }); break;
    case OpKind::abs: unary([](double x, double) { return sign(x); }); break;
    case OpKind::sqrt: unary([](double, double r) { return r > 0.0 ? 0.5 / r : 0.0; }); break;
    case OpKind::softplus: unary([](double x, double) { return stable_sigmoid(x); }); break;
    case OpKind::sum:
    case OpKind::mean: {
      if (!wants(ia)) break;
      ensure(grads[ia], a.shape());
      const double v = node.kind == OpKind::sum ? g[0] : g[0] / static_cast<double>(a.size());
      for (double& x : grads[ia].data()) x += v;
      break;
    }
    case OpKind::concat_rows: {
      const std::size_t ib = node.inputs[1];
      if (wants(ia)) {
        ensure(grads[ia], a.shape());
        for (std::size_t i = 0; i < a.size(); ++i) grads[ia][i] += g[i];
      }
      if (wants(ib)) {
        const Tensor& b = nodes_[ib].value;
        ensure(grads[ib], b.shape());
        for (std::size_t i = 0; i < b.size(); ++i) grads[ib][i] += g[a.size() + i];
      }
      break;
    }
    case OpKind::add_row: {
      const std::size_t ib = node.inputs[1];
      if (wants(ia)) accumulate(grads[ia], a, g);
      if (wants(ib)) {
        const Tensor& b = nodes_[ib].value;
        ensure(grads[ib], b.shape());
        const std::size_t cols = a.cols();
        for (std::size_t r = 0; r < a.rows(); ++r)
          for (std::size_t c = 0; c < cols; ++c) grads[ib][c] += g[r * cols + c];
      }
      break;
    }
    case OpKind::scale: unary([s = node.param](double, double) { return s; }); break;
    case OpKind::log_softmax_rows: {
      if (!wants(ia)) break;
      ensure(grads[ia], a.shape());
      const std::size_t cols = a.cols();
      for (std::size_t r = 0; r < a.rows(); ++r) {
        double gs = 0.0;
        for (std::size_t c = 0; c < cols; ++c) gs += g[r * cols + c];
        for (std::size_t c = 0; c < cols; ++c)
          grads[ia][r * cols + c] += g[r * cols + c] - std::exp(y[r * cols + c]) * gs;
      }
      break;
    }
    case OpKind::pair_sqdist_sum: {
      if (!wants(ia)) break;
      ensure(grads[ia], a.shape());
      const std::size_t rows = a.rows(), cols = a.cols();
      std::vector<double> colsum(cols, 0.0);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) colsum[c] += a[r * cols + c];
      const double m = static_cast<double>(rows);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) grads[ia][r * cols + c] += 2.0 * g[0] * (m * a[r * cols + c] - colsum[c]);
      break;
    }
    case OpKind::cross_l1_sum: {
      const std::size_t ib = node.inputs[1];
      const Tensor& b = nodes_[ib].value;
      Tensor ga(a.shape()), gb(b.shape());
      kp::cross_l1_grad(a.data(), a.rows(), b.data(), b.rows(), a.cols(), g[0], ga.data(), gb.data());
      if (wants(ia)) accumulate(grads[ia], a, ga);
      if (wants(ib)) accumulate(grads[ib], b, gb);
      break;
    }
    case OpKind::custom: {
      std::vector<const Tensor*> ins;
      for (auto id : node.inputs) ins.push_back(&nodes_[id].value);
      auto parts = (*node.vjp)(g, ins, y);
      if (parts.size() != node.inputs.size())
        throw std::logic_error(node.name + ": backward rule returned the wrong number of gradients");
      for (std::size_t i = 0; i < parts.size(); ++i) {
        const auto id = node.inputs[i];
        if (!wants(id)) continue;
        if (parts[i].shape() != nodes_[id].value.shape())
          shape_mismatch(OpKind::custom, parts[i].shape(), nodes_[id].value.shape());
        accumulate(grads[id], nodes_[id].value, parts[i]);
      }
      break;
    }
  }
}

GradientMap Tape::backward(Var root) const {
  check_owned(root, "backward");
  const Tensor& rv = nodes_[root.id()].value;
  if (rv.size() != 1) throw ShapeError("backward: root must be a scalar, got shape " + shape_string(rv.shape()));

  GradientMap out;
  out.grads_.resize(nodes_.size());
  out.grads_[root.id()] = Tensor(rv.shape(), 1.0);
  for (std::size_t id = root.id() + 1; id-- > 0;) {
    const Node& node = nodes_[id];
    if (!node.requires_grad || out.grads_[id].size() == 0) continue;
    backprop_node(node, out.grads_[id], out.grads_);
  }
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    if (out.grads_[id].size() == 0) out.grads_[id] = Tensor(nodes_[id].value.shape());
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

Var apply1(OpKind kind, Var x, double param = 0.0) {
  if (!x.valid()) throw std::invalid_argument(std::string(op_name(kind)) + ": unbound operand");
  const Var in[] = {x};
  return x.tape().apply(kind, in, param);
}

Var apply2(OpKind kind, Var a, Var b) {
  if (!a.valid()) throw std::invalid_argument(std::string(op_name(kind)) + ": unbound operand");
  const Var in[] = {a, b};
  return a.tape().apply(kind, in);
}

}  // namespace

Var add(Var a, Var b) { return apply2(OpKind::add, a, b); }
Var sub(Var a, Var b) { return apply2(OpKind::sub, a, b); }
Var mul(Var a, Var b) { return apply2(OpKind::mul, a, b); }
Var matmul(Var a, Var b) { return apply2(OpKind::matmul, a, b); }
Var leaky_relu(Var x, double negative_slope) { return apply1(OpKind::leaky_relu, x, negative_slope); }
Var relu(Var x) { return apply1(OpKind::relu, x); }
Var tanh(Var x) { return apply1(OpKind::tanh, x); }
Var sigmoid(Var x) { return apply1(OpKind::sigmoid, x); }
Var exp(Var x) { return apply1(OpKind::exp, x); }
Var log(Var x) { return apply1(OpKind::log, x); }
Var square(Var x) { return apply1(OpKind::square, x); }
Var abs(Var x) { return apply1(OpKind::abs, x); }
Var sqrt(Var x) { return apply1(OpKind::sqrt, x); }
Var softplus(Var x) { return apply1(OpKind::softplus, x); }
Var sum(Var x) { return apply1(OpKind::sum, x); }
Var mean(Var x) { return apply1(OpKind::mean, x); }
Var concat_rows(Var top, Var bottom) { return apply2(OpKind::concat_rows, top, bottom); }
Var add_row(Var matrix, Var row) { return apply2(OpKind::add_row, matrix, row); }
Var scale(Var x, double factor) { return apply1(OpKind::scale, x, factor); }
Var log_softmax_rows(Var logits) { return apply1(OpKind::log_softmax_rows, logits); }
Var pair_sqdist_sum(Var x) { return apply1(OpKind::pair_sqdist_sum, x); }
Var cross_l1_sum(Var a, Var b) { return apply2(OpKind::cross_l1_sum, a, b); }

}  // namespace mlgan
