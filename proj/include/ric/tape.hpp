#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "ric/tensor.hpp"

namespace ric::ad {

// Reverse-mode tape over Tensor values. Nodes are appended in evaluation
// order, so ids already form a topological order and the backward sweep is a
// single reverse pass. A tape is confined to one thread; values may be copied
// out freely once recording is done.

class ShapeError : public std::runtime_error {
 public:
  ShapeError(const std::string& primitive, const Tensor& a, const Tensor& b)
      : std::runtime_error(primitive + ": shape mismatch " + a.shape_string() +
                           " vs " + b.shape_string()) {}
  ShapeError(const std::string& primitive, const std::string& detail)
      : std::runtime_error(primitive + ": " + detail) {}
};

class Tape;

struct Var {
  int id = -1;
  Tape* tape = nullptr;
  bool valid() const { return tape != nullptr && id >= 0; }
};

// Leaf id -> gradient tensor, as produced by Tape::backward.
class Gradients {
 public:
  explicit Gradients(std::unordered_map<int, Tensor> g) : grads_(std::move(g)) {}
  bool contains(Var v) const { return grads_.count(v.id) > 0; }
  const Tensor& at(Var v) const { return grads_.at(v.id); }
  std::size_t size() const { return grads_.size(); }

 private:
  std::unordered_map<int, Tensor> grads_;
};

enum class Op : std::uint8_t {
  kLeaf,
  kConstant,
  kAdd,
  kSub,
  kMul,
  kScale,
  kMatVec,
  kConcat,
  kPick,
  kSigmoid,
  kTanh,
  kSilu,
  kRelu,
  kSoftmax,
  kLog,
  kExp,
  kLogGamma,
  kDigamma,
  kSum,
  kMean,
  kMax,
};

class Tape {
 public:
  // Leaves participate in gradients; constants do not. Values are copied
  // into the tape's reusable slot storage.
  Var leaf(const Tensor& value);
  Var constant(const Tensor& value);
  Var constant(double value);

  // Vector constant straight from an Eigen array expression; evaluates into
  // the slot buffer without a temporary.
  template <class Derived>
  Var constant_vector(const Eigen::ArrayBase<Derived>& expr) {
    Node& n = next_slot(Op::kConstant, -1, -1, 0, 0.0);
    n.value.shape = Shape::vector(static_cast<int>(expr.size()));
    n.value.data = expr.derived();
    return Var{static_cast<int>(live_) - 1, this};
  }

  const Tensor& value(Var v) const { return nodes_[v.id].value; }

  // Gradient of a scalar root with respect to every leaf it depends on.
  // Deterministic: repeated calls yield bit-identical results.
  Gradients backward(Var root) const;

  // Drops all nodes. Slots and their buffers stay allocated and are reused
  // by subsequent emissions, so steady-state recording does not allocate.
  void clear() { live_ = 0; }

  std::size_t size() const { return live_; }

  Var emit(Op op, Var a, Var b, int index, double factor);

 private:
  struct Node {
    Op op = Op::kLeaf;
    int a = -1;
    int b = -1;
    int index = 0;      // pick coordinate
    double factor = 0;  // scale multiplier
    Tensor value;
  };

  Node& next_slot(Op op, int a, int b, int index, double factor);
  void check_owned(Var v, const char* primitive) const;

  std::vector<Node> nodes_;
  std::size_t live_ = 0;

  // Backward scratch, reused across calls.
  mutable std::vector<Tensor> adjoint_;
  mutable std::vector<char> touched_;
};

// Primitive free functions. Elementwise binaries accept equal shapes or a
// rank-0 operand broadcast against the other side.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var matvec(Var m, Var v);
Var concat(Var a, Var b);
Var pick(Var v, int index);
Var sigmoid(Var a);
Var tanh(Var a);
Var silu(Var a);
Var relu(Var a);
Var softmax(Var a);
Var log(Var a);
Var exp(Var a);
Var log_gamma(Var a);
Var digamma(Var a);
Var sum(Var a);
Var mean(Var a);
Var max(Var a, Var b);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }
inline Var operator-(Var a) { return scale(a, -1.0); }

// min via max: gradient ties resolve to the first operand's branch.
inline Var min(Var a, Var b) { return -max(-a, -b); }

// Max over coordinates of |autodiff - central difference| / (|central| + 1e-8)
// for a scalar-valued function built on a fresh tape from one leaf.
double gradient_check(const std::function<Var(Tape&, Var)>& f, const Tensor& x,
                      double step);

}  // namespace ric::ad
