#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace ric {

// A point on the probability simplex. Validation is explicit (construction
// sites decide how strict to be) but every factory here checks.
struct SimplexVector {
  Eigen::ArrayXd probs;

  SimplexVector() = default;
  explicit SimplexVector(Eigen::ArrayXd p) : probs(std::move(p)) {}

  static SimplexVector uniform(int k) {
    return SimplexVector(Eigen::ArrayXd::Constant(k, 1.0 / k));
  }
  static SimplexVector checked(Eigen::ArrayXd p, double tol = 1e-9) {
    SimplexVector s(std::move(p));
    if (!s.valid(tol)) throw std::invalid_argument("SimplexVector: not a distribution");
    return s;
  }
  static SimplexVector one_hot(int k, int index) {
    Eigen::ArrayXd p = Eigen::ArrayXd::Zero(k);
    p[index] = 1.0;
    return SimplexVector(std::move(p));
  }

  int size() const { return static_cast<int>(probs.size()); }
  double operator[](int i) const { return probs[i]; }

  bool valid(double tol = 1e-9) const {
    return probs.size() > 0 && (probs >= 0.0).all() &&
           std::abs(probs.sum() - 1.0) <= tol;
  }
  bool interior() const { return (probs > 0.0).all() && (probs < 1.0).all(); }

  int argmax() const {
    int idx = 0;
    probs.maxCoeff(&idx);
    return idx;
  }
  double confidence() const { return probs.maxCoeff(); }
};

// Entropy in nats; 0 log 0 = 0.
inline double entropy(const SimplexVector& q) {
  double h = 0.0;
  for (int i = 0; i < q.size(); ++i) {
    if (q[i] > 0.0) h -= q[i] * std::log(q[i]);
  }
  return h;
}

// KL(q || p) in nats; requires p > 0 wherever q > 0.
inline double kl_divergence(const SimplexVector& q, const SimplexVector& p) {
  double kl = 0.0;
  for (int i = 0; i < q.size(); ++i) {
    if (q[i] > 0.0) {
      if (!(p[i] > 0.0)) return std::numeric_limits<double>::infinity();
      kl += q[i] * std::log(q[i] / p[i]);
    }
  }
  return kl;
}

inline double total_variation(const SimplexVector& a, const SimplexVector& b) {
  return 0.5 * (a.probs - b.probs).abs().sum();
}

}  // namespace ric
