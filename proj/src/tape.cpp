#include "ric/tape.hpp"

#include <cmath>
#include <string>

#include "ric/numerics.hpp"

namespace ric::ad {

namespace {

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

const char* op_name(Op op) {
  switch (op) {
    case Op::kLeaf: return "leaf";
    case Op::kConstant: return "constant";
    case Op::kAdd: return "add";
    case Op::kSub: return "sub";
    case Op::kMul: return "multiply";
    case Op::kScale: return "scale";
    case Op::kMatVec: return "matvec";
    case Op::kConcat: return "concatenate";
    case Op::kPick: return "pick";
    case Op::kSigmoid: return "sigmoid";
    case Op::kTanh: return "tanh";
    case Op::kSilu: return "silu";
    case Op::kRelu: return "relu";
    case Op::kSoftmax: return "softmax";
    case Op::kLog: return "log";
    case Op::kExp: return "exp";
    case Op::kLogGamma: return "log_gamma";
    case Op::kDigamma: return "digamma";
    case Op::kSum: return "sum";
    case Op::kMean: return "mean";
    case Op::kMax: return "max";
  }
  return "?";
}

}  // namespace

void Tape::check_owned(Var v, const char* primitive) const {
  if (!v.valid() || v.tape != this || v.id >= static_cast<int>(live_)) {
    throw ShapeError(primitive, "operand does not belong to this tape");
  }
}

Tape::Node& Tape::next_slot(Op op, int a, int b, int index, double factor) {
  if (live_ == nodes_.size()) nodes_.emplace_back();
  Node& n = nodes_[live_++];
  n.op = op;
  n.a = a;
  n.b = b;
  n.index = index;
  n.factor = factor;
  return n;
}

Var Tape::leaf(const Tensor& value) {
  Node& n = next_slot(Op::kLeaf, -1, -1, 0, 0.0);
  n.value.shape = value.shape;
  n.value.data = value.data;
  return Var{static_cast<int>(live_) - 1, this};
}

Var Tape::constant(const Tensor& value) {
  Node& n = next_slot(Op::kConstant, -1, -1, 0, 0.0);
  n.value.shape = value.shape;
  n.value.data = value.data;
  return Var{static_cast<int>(live_) - 1, this};
}

Var Tape::constant(double value) {
  Node& n = next_slot(Op::kConstant, -1, -1, 0, 0.0);
  n.value.shape = Shape::scalar();
  n.value.data.resize(1);
  n.value.data[0] = value;
  return Var{static_cast<int>(live_) - 1, this};
}

Var Tape::emit(Op op, Var a, Var b, int index, double factor) {
  check_owned(a, op_name(op));
  if (b.valid()) {
    check_owned(b, op_name(op));
    if (b.tape != a.tape) throw ShapeError(op_name(op), "operands from different tapes");
  }

  // Note: parent references must be taken after next_slot, which may grow
  // the node vector.
  Node& n = next_slot(op, a.id, b.valid() ? b.id : -1, index, factor);
  const Tensor& av = nodes_[a.id].value;
  const Tensor* bv = b.valid() ? &nodes_[b.id].value : nullptr;
  Tensor& out = n.value;

  switch (op) {
    case Op::kAdd:
      if (av.shape == bv->shape) {
        out.shape = av.shape;
        out.data = av.data + bv->data;
      } else if (av.is_scalar()) {
        out.shape = bv->shape;
        out.data = av.data[0] + bv->data;
      } else if (bv->is_scalar()) {
        out.shape = av.shape;
        out.data = av.data + bv->data[0];
      } else {
        throw ShapeError("add", av, *bv);
      }
      break;
    case Op::kSub:
      if (av.shape == bv->shape) {
        out.shape = av.shape;
        out.data = av.data - bv->data;
      } else if (av.is_scalar()) {
        out.shape = bv->shape;
        out.data = av.data[0] - bv->data;
      } else if (bv->is_scalar()) {
        out.shape = av.shape;
        out.data = av.data - bv->data[0];
      } else {
        throw ShapeError("sub", av, *bv);
      }
      break;
    case Op::kMul:
      if (av.shape == bv->shape) {
        out.shape = av.shape;
        out.data = av.data * bv->data;
      } else if (av.is_scalar()) {
        out.shape = bv->shape;
        out.data = av.data[0] * bv->data;
      } else if (bv->is_scalar()) {
        out.shape = av.shape;
        out.data = av.data * bv->data[0];
      } else {
        throw ShapeError("multiply", av, *bv);
      }
      break;
    case Op::kMax:
      if (av.shape == bv->shape) {
        out.shape = av.shape;
        out.data = av.data.max(bv->data);
      } else if (av.is_scalar()) {
        out.shape = bv->shape;
        out.data = bv->data.max(av.data[0]);
      } else if (bv->is_scalar()) {
        out.shape = av.shape;
        out.data = av.data.max(bv->data[0]);
      } else {
        throw ShapeError("max", av, *bv);
      }
      break;
    case Op::kScale:
      out.shape = av.shape;
      out.data = av.data * factor;
      break;
    case Op::kMatVec: {
      if (av.rank() != 2 || bv->rank() != 1 || av.cols() != bv->rows()) {
        throw ShapeError("matvec", av, *bv);
      }
      out.shape = Shape::vector(av.rows());
      out.data.resize(av.rows());
      out.data.matrix().noalias() = av.mat() * bv->data.matrix();
      break;
    }
    case Op::kConcat: {
      if (av.rank() != 1 || bv->rank() != 1) throw ShapeError("concatenate", av, *bv);
      out.shape = Shape::vector(static_cast<int>(av.size() + bv->size()));
      out.data.resize(av.size() + bv->size());
      out.data.head(av.size()) = av.data;
      out.data.tail(bv->size()) = bv->data;
      break;
    }
    case Op::kPick:
      if (index < 0 || index >= av.size()) {
        throw ShapeError("pick", "index " + std::to_string(index) +
                                     " out of range for " + av.shape_string());
      }
      out.shape = Shape::scalar();
      out.data.resize(1);
      out.data[0] = av.data[index];
      break;
    case Op::kSigmoid:
      out.shape = av.shape;
      out.data = av.data.unaryExpr([](double x) { return stable_sigmoid(x); });
      break;
    case Op::kTanh:
      out.shape = av.shape;
      out.data = av.data.tanh();
      break;
    case Op::kSilu:
      out.shape = av.shape;
      out.data = av.data.unaryExpr([](double x) { return x * stable_sigmoid(x); });
      break;
    case Op::kRelu:
      out.shape = av.shape;
      out.data = av.data.max(0.0);
      break;
    case Op::kSoftmax: {
      if (av.rank() != 1) throw ShapeError("softmax", "expects a vector, got " + av.shape_string());
      out.shape = av.shape;
      const double m = av.data.maxCoeff();
      out.data = (av.data - m).exp();
      out.data /= out.data.sum();
      break;
    }
    case Op::kLog:
      out.shape = av.shape;
      out.data = av.data.log();
      break;
    case Op::kExp:
      out.shape = av.shape;
      out.data = av.data.exp();
      break;
    case Op::kLogGamma:
      out.shape = av.shape;
      out.data = av.data.unaryExpr([](double x) { return ric::log_gamma(x); });
      break;
    case Op::kDigamma:
      out.shape = av.shape;
      out.data = av.data.unaryExpr([](double x) { return ric::digamma(x); });
      break;
    case Op::kSum:
      out.shape = Shape::scalar();
      out.data.resize(1);
      out.data[0] = av.data.sum();
      break;
    case Op::kMean:
      if (av.size() == 0) throw ShapeError("mean", "empty operand");
      out.shape = Shape::scalar();
      out.data.resize(1);
      out.data[0] = av.data.mean();
      break;
    case Op::kLeaf:
    case Op::kConstant:
      throw ShapeError(op_name(op), "not an emittable primitive");
  }
  return Var{static_cast<int>(live_) - 1, this};
}

Gradients Tape::backward(Var root) const {
  check_owned(root, "backward");
  const Node& r = nodes_[root.id];
  if (!r.value.is_scalar()) {
    throw ShapeError("backward", "root must be scalar, got " + r.value.shape_string());
  }

  if (adjoint_.size() < live_) adjoint_.resize(nodes_.size());
  touched_.assign(live_, 0);
  auto touch = [&](int id) -> Tensor& {
    Tensor& adj = adjoint_[id];
    if (!touched_[id]) {
      adj.shape = nodes_[id].value.shape;
      adj.data.resize(nodes_[id].value.size());
      adj.data.setZero();
      touched_[id] = 1;
    }
    return adj;
  };

  touch(root.id).data[0] = 1.0;

  for (int i = root.id; i >= 0; --i) {
    if (!touched_[i]) continue;
    const Node& n = nodes_[i];
    if (n.op == Op::kLeaf || n.op == Op::kConstant) continue;
    const Eigen::ArrayXd& g = adjoint_[i].data;
    const Tensor& av = nodes_[n.a].value;

    // Accumulation helpers for the scalar-broadcast binaries.
    auto acc_same_or_reduce = [&](int parent, const auto& grad_expr) {
      Tensor& adj = touch(parent);
      if (adj.data.size() == g.size()) {
        adj.data += grad_expr;
      } else {
        adj.data[0] += grad_expr.sum();
      }
    };

    switch (n.op) {
      case Op::kAdd:
        acc_same_or_reduce(n.a, g);
        acc_same_or_reduce(n.b, g);
        break;
      case Op::kSub:
        acc_same_or_reduce(n.a, g);
        acc_same_or_reduce(n.b, -g);
        break;
      case Op::kMul: {
        const Tensor& bv = nodes_[n.b].value;
        if (bv.is_scalar()) {
          acc_same_or_reduce(n.a, g * bv.data[0]);
        } else {
          acc_same_or_reduce(n.a, g * bv.data);
        }
        if (av.is_scalar()) {
          acc_same_or_reduce(n.b, g * av.data[0]);
        } else {
          acc_same_or_reduce(n.b, g * av.data);
        }
        break;
      }
      case Op::kScale:
        touch(n.a).data += g * n.factor;
        break;
      case Op::kMatVec: {
        const Tensor& bv = nodes_[n.b].value;
        Tensor& ga = touch(n.a);
        Eigen::Map<RowMajorMatrix>(ga.data.data(), ga.rows(), ga.cols()).noalias() +=
            g.matrix() * bv.data.matrix().transpose();
        touch(n.b).data.matrix().noalias() += av.mat().transpose() * g.matrix();
        break;
      }
      case Op::kConcat: {
        const Eigen::Index na = av.size();
        touch(n.a).data += g.head(na);
        touch(n.b).data += g.tail(g.size() - na);
        break;
      }
      case Op::kPick:
        touch(n.a).data[n.index] += g[0];
        break;
      case Op::kSigmoid: {
        const Eigen::ArrayXd& s = n.value.data;
        touch(n.a).data += g * s * (1.0 - s);
        break;
      }
      case Op::kTanh: {
        const Eigen::ArrayXd& t = n.value.data;
        touch(n.a).data += g * (1.0 - t.square());
        break;
      }
      case Op::kSilu: {
        Tensor& ga = touch(n.a);
        for (Eigen::Index j = 0; j < g.size(); ++j) {
          const double s = stable_sigmoid(av.data[j]);
          ga.data[j] += g[j] * s * (1.0 + av.data[j] * (1.0 - s));
        }
        break;
      }
      case Op::kRelu:
        touch(n.a).data += g * (av.data > 0.0).cast<double>();
        break;
      case Op::kSoftmax: {
        const Eigen::ArrayXd& y = n.value.data;
        const double dot = (g * y).sum();
        touch(n.a).data += y * (g - dot);
        break;
      }
      case Op::kLog:
        touch(n.a).data += g / av.data;
        break;
      case Op::kExp:
        touch(n.a).data += g * n.value.data;
        break;
      case Op::kLogGamma:
        touch(n.a).data +=
            g * av.data.unaryExpr([](double x) { return ric::digamma(x); });
        break;
      case Op::kDigamma:
        touch(n.a).data +=
            g * av.data.unaryExpr([](double x) { return ric::trigamma(x); });
        break;
      case Op::kSum:
        touch(n.a).data += g[0];
        break;
      case Op::kMean:
        touch(n.a).data += g[0] / static_cast<double>(av.size());
        break;
      case Op::kMax: {
        const Tensor& bv = nodes_[n.b].value;
        // Ties go to the first operand.
        if (av.shape == bv.shape) {
          touch(n.a).data += g * (av.data >= bv.data).cast<double>();
          touch(n.b).data += g * (av.data < bv.data).cast<double>();
        } else if (bv.is_scalar()) {
          touch(n.a).data += g * (av.data >= bv.data[0]).cast<double>();
          touch(n.b).data[0] += (g * (av.data < bv.data[0]).cast<double>()).sum();
        } else {
          touch(n.a).data[0] += (g * (av.data[0] >= bv.data).cast<double>()).sum();
          touch(n.b).data += g * (av.data[0] < bv.data).cast<double>();
        }
        break;
      }
      case Op::kLeaf:
      case Op::kConstant:
        break;
    }
  }

  std::unordered_map<int, Tensor> out;
  for (int i = 0; i <= root.id; ++i) {
    if (nodes_[i].op == Op::kLeaf && touched_[i]) out.emplace(i, adjoint_[i]);
  }
  return Gradients(std::move(out));
}

Var add(Var a, Var b) { return a.tape->emit(Op::kAdd, a, b, 0, 0.0); }
Var sub(Var a, Var b) { return a.tape->emit(Op::kSub, a, b, 0, 0.0); }
Var mul(Var a, Var b) { return a.tape->emit(Op::kMul, a, b, 0, 0.0); }
Var scale(Var a, double factor) { return a.tape->emit(Op::kScale, a, Var{}, 0, factor); }
Var matvec(Var m, Var v) { return m.tape->emit(Op::kMatVec, m, v, 0, 0.0); }
Var concat(Var a, Var b) { return a.tape->emit(Op::kConcat, a, b, 0, 0.0); }
Var pick(Var v, int index) { return v.tape->emit(Op::kPick, v, Var{}, index, 0.0); }
Var sigmoid(Var a) { return a.tape->emit(Op::kSigmoid, a, Var{}, 0, 0.0); }
Var tanh(Var a) { return a.tape->emit(Op::kTanh, a, Var{}, 0, 0.0); }
Var silu(Var a) { return a.tape->emit(Op::kSilu, a, Var{}, 0, 0.0); }
Var relu(Var a) { return a.tape->emit(Op::kRelu, a, Var{}, 0, 0.0); }
Var softmax(Var a) { return a.tape->emit(Op::kSoftmax, a, Var{}, 0, 0.0); }
Var log(Var a) { return a.tape->emit(Op::kLog, a, Var{}, 0, 0.0); }
Var exp(Var a) { return a.tape->emit(Op::kExp, a, Var{}, 0, 0.0); }
Var log_gamma(Var a) { return a.tape->emit(Op::kLogGamma, a, Var{}, 0, 0.0); }
Var digamma(Var a) { return a.tape->emit(Op::kDigamma, a, Var{}, 0, 0.0); }
Var sum(Var a) { return a.tape->emit(Op::kSum, a, Var{}, 0, 0.0); }
Var mean(Var a) { return a.tape->emit(Op::kMean, a, Var{}, 0, 0.0); }
Var max(Var a, Var b) { return a.tape->emit(Op::kMax, a, b, 0, 0.0); }

double gradient_check(const std::function<Var(Tape&, Var)>& f, const Tensor& x,
                      double step) {
  if (!(step > 0.0)) throw std::invalid_argument("gradient_check: step must be positive");

  Tape tape;
  Var leaf = tape.leaf(x);
  Var root = f(tape, leaf);
  if (!tape.value(root).is_scalar()) {
    throw ShapeError("gradient_check", "function must return a scalar");
  }
  Gradients grads = tape.backward(root);
  Tensor auto_grad = grads.contains(leaf) ? grads.at(leaf) : Tensor::zeros(x.shape);

  auto eval = [&](const Tensor& point, Eigen::Index coord) {
    Tape t;
    const double v = t.value(f(t, t.leaf(point))).value();
    if (!std::isfinite(v)) {
      throw std::runtime_error("gradient_check: non-finite value at coordinate " +
                               std::to_string(coord));
    }
    return v;
  };

  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Tensor lo = x, hi = x;
    lo.data[i] -= step;
    hi.data[i] += step;
    const double central = (eval(hi, i) - eval(lo, i)) / (2.0 * step);
    const double rel = std::abs(auto_grad.data[i] - central) / (std::abs(central) + 1e-8);
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace ric::ad
