#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ric/numerics.hpp"
#include "ric/rng.hpp"
#include "ric/tape.hpp"

using ric::Rng;
using namespace ric::ad;

namespace {

Tensor random_tensor(Shape shape, Rng& rng, double lo = -2.0, double hi = 2.0) {
  Tensor t = Tensor::zeros(shape);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data[i] = rng.uniform(lo, hi);
  return t;
}

// Keeps coordinates away from kinks so central differences stay valid.
Tensor random_tensor_away_from(Shape shape, Rng& rng, double avoid, double margin) {
  Tensor t = random_tensor(shape, rng);
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    while (std::abs(t.data[i] - avoid) < margin) t.data[i] = rng.uniform(-2.0, 2.0);
  }
  return t;
}

}  // namespace

TEST_CASE("log_gamma matches high-precision references") {
  CHECK(ric::log_gamma(3.0) == doctest::Approx(0.6931471805599453).epsilon(1e-12));
  CHECK(ric::log_gamma(1.0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(ric::log_gamma(0.5) == doctest::Approx(0.5723649429247001).epsilon(1e-12));
  CHECK(ric::log_gamma(10.0) == doctest::Approx(12.801827480081469).epsilon(1e-12));
  CHECK_THROWS_AS(ric::log_gamma(0.0), std::domain_error);
  CHECK_THROWS_AS(ric::log_gamma(-1.5), std::domain_error);
}

TEST_CASE("digamma matches the negated Euler-Mascheroni constant at 1") {
  CHECK(ric::digamma(1.0) == doctest::Approx(-0.5772156649015329).epsilon(1e-12));
}

TEST_CASE("digamma recurrence holds") {
  for (double x : {0.5, 1.0, 2.5, 10.0}) {
    CHECK(ric::digamma(x + 1.0) - ric::digamma(x) ==
          doctest::Approx(1.0 / x).epsilon(1e-10));
  }
}

TEST_CASE("trigamma matches pi^2/6 at 1 and the recurrence") {
  CHECK(ric::trigamma(1.0) == doctest::Approx(M_PI * M_PI / 6.0).epsilon(1e-12));
  for (double x : {0.5, 2.0, 7.5}) {
    CHECK(ric::trigamma(x) - ric::trigamma(x + 1.0) ==
          doctest::Approx(1.0 / (x * x)).epsilon(1e-10));
  }
}

TEST_CASE("rng substreams are deterministic and state round-trips") {
  Rng a = Rng::substream(7, {1, 2});
  Rng b = Rng::substream(7, {1, 2});
  Rng c = Rng::substream(7, {1, 3});
  CHECK(a.raw() == b.raw());
  CHECK(a.raw() == b.raw());
  Rng a2 = Rng::substream(7, {1, 2});
  CHECK(a2.raw() != c.raw());

  const std::string state = a.state_string();
  Rng restored(0);
  restored.set_state(state);
  for (int i = 0; i < 5; ++i) CHECK(restored.raw() == a.raw());
}

TEST_CASE("rng gamma moments match the distribution") {
  Rng rng(11);
  for (double alpha : {0.3, 1.0, 4.5}) {
    double sum = 0.0, sumsq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double g = rng.gamma(alpha);
      sum += g;
      sumsq += g * g;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(mean == doctest::Approx(alpha).epsilon(0.02));
    CHECK(var == doctest::Approx(alpha).epsilon(0.05));
  }
}

TEST_CASE("softmax of zeros is uniform, sums to one, strictly positive") {
  Tape tape;
  Var z = tape.leaf(Tensor::vector({0.0, 0.0, 0.0}));
  Var s = softmax(z);
  const Tensor& v = tape.value(s);
  for (int i = 0; i < 3; ++i) CHECK(v.data[i] == doctest::Approx(1.0 / 3).epsilon(1e-15));

  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    Tape t;
    Tensor logits = random_tensor({5}, rng, -30.0, 30.0);
    const Tensor& out = t.value(softmax(t.leaf(logits)));
    CHECK(std::abs(out.data.sum() - 1.0) < 1e-12);
    CHECK((out.data > 0.0).all());
  }
}

TEST_CASE("backward of sum is all ones; constants yield empty maps") {
  Tape tape;
  Var x = tape.leaf(Tensor::vector({1.0, -2.0, 3.5, 0.0}));
  Gradients g = tape.backward(sum(x));
  REQUIRE(g.contains(x));
  CHECK((g.at(x).data == 1.0).all());

  Tape t2;
  Var c = t2.constant(Tensor::vector({1.0, 2.0}));
  Gradients g2 = t2.backward(sum(c));
  CHECK(g2.size() == 0);
}

TEST_CASE("log softmax picked at a class has the classic gradient") {
  Tape tape;
  Var z = tape.leaf(Tensor::vector({1.0, 2.0, 3.0}));
  Var root = log(pick(softmax(z), 2));
  Gradients g = tape.backward(root);
  const Tensor& p = tape.value(softmax(z));  // same values, fresh node
  const Eigen::ArrayXd expected = Eigen::ArrayXd(Eigen::VectorXd::Unit(3, 2)) - p.data;
  for (int i = 0; i < 3; ++i) {
    CHECK(g.at(z).data[i] == doctest::Approx(expected[i]).epsilon(1e-12));
  }
}

TEST_CASE("backward is deterministic across repeated calls") {
  Rng rng(5);
  Tape tape;
  Var x = tape.leaf(random_tensor({6}, rng));
  Var w = tape.leaf(random_tensor({6}, rng));
  Var root = sum(mul(sigmoid(x), tanh(w)));
  Gradients g1 = tape.backward(root);
  Gradients g2 = tape.backward(root);
  for (int i = 0; i < 6; ++i) {
    CHECK(g1.at(x).data[i] == g2.at(x).data[i]);
    CHECK(g1.at(w).data[i] == g2.at(w).data[i]);
  }
}

TEST_CASE("shape mismatches raise structured errors naming the primitive") {
  Tape tape;
  Var a = tape.leaf(Tensor::vector({1.0, 2.0}));
  Var b = tape.leaf(Tensor::vector({1.0, 2.0, 3.0}));
  CHECK_THROWS_WITH_AS(add(a, b), doctest::Contains("add"), ShapeError);
  CHECK_THROWS_WITH_AS(mul(a, b), doctest::Contains("[2]"), ShapeError);
  Var m = tape.leaf(Tensor::matrix(2, 2, Eigen::ArrayXd::Ones(4)));
  CHECK_THROWS_WITH_AS(matvec(m, b), doctest::Contains("matvec"), ShapeError);
  CHECK_THROWS_AS(tape.backward(a), ShapeError);  // non-scalar root
}

TEST_CASE("gradient_check on simple functions") {
  auto sum_of_squares = [](Tape&, Var x) { return sum(mul(x, x)); };
  CHECK(gradient_check(sum_of_squares, Tensor::vector({1.0, 2.0}), 1e-5) < 1e-6);

  auto constant_fn = [](Tape& t, Var) { return t.constant(3.0); };
  CHECK(gradient_check(constant_fn, Tensor::vector({1.0, 2.0}), 1e-5) == 0.0);
}

TEST_CASE("every primitive passes central-difference checks on random inputs") {
  Rng rng(17);
  const double step = 1e-5;
  const double tol = 1e-5;

  for (int trial = 0; trial < 20; ++trial) {
    Tensor v = random_tensor({6}, rng);
    Tensor w = random_tensor({6}, rng);
    Tensor pos = random_tensor({6}, rng, 0.2, 3.0);

    auto weighted = [&](auto op) {
      return [op, w](Tape& t, Var x) { return sum(mul(op(t, x), t.constant(w))); };
    };

    CHECK(gradient_check(weighted([&](Tape& t, Var x) { return add(x, t.constant(w)); }), v, step) < tol);
    CHECK(gradient_check(weighted([&](Tape& t, Var x) { return sub(t.constant(w), x); }), v, step) < tol);
    CHECK(gradient_check(weighted([&](Tape& t, Var x) { return mul(x, t.constant(w)); }), v, step) < tol);
    CHECK(gradient_check(weighted([](Tape&, Var x) { return scale(x, -1.7); }), v, step) < tol);
    CHECK(gradient_check(weighted([](Tape&, Var x) { return sigmoid(x); }), v, step) < tol);
    CHECK(gradient_check(weighted([](Tape&, Var x) { return tanh(x); }), v, step) < tol);
    CHECK(gradient_check(weighted([](Tape&, Var x) { return silu(x); }), v, step) < tol);
    CHECK(gradient_check(weighted([](Tape&, Var x) { return softmax(x); }), v, step) < tol);
    CHECK(gradient_check(weighted([](Tape&, Var x) { return exp(x); }), v, step) < tol);
    CHECK(gradient_check(weighted([](Tape&, Var x) { return log(x); }), pos, step) < tol);
    CHECK(gradient_check(weighted([](Tape&, Var x) { return log_gamma(x); }), pos, step) < tol);
    CHECK(gradient_check(weighted([](Tape&, Var x) { return digamma(x); }), pos, step) < tol);
    CHECK(gradient_check([](Tape&, Var x) { return sum(x); }, v, step) < tol);
    CHECK(gradient_check([](Tape&, Var x) { return mean(x); }, v, step) < tol);
    CHECK(gradient_check([](Tape&, Var x) { return pick(x, 3); }, v, step) < tol);
    Tensor w12 = random_tensor({12}, rng);
    CHECK(gradient_check(
              [&](Tape& t, Var x) {
                return sum(mul(concat(x, t.constant(w)), t.constant(w12)));
              },
              v, step) < tol);

    // Kinked primitives: sample away from the kink.
    Tensor away = random_tensor_away_from({6}, rng, 0.0, 1e-3);
    CHECK(gradient_check(weighted([](Tape&, Var x) { return relu(x); }), away, step) < tol);
    Tensor other = random_tensor({6}, rng);
    Tensor sep = away;
    for (int i = 0; i < 6; ++i) {
      while (std::abs(sep.data[i] - other.data[i]) < 1e-3) sep.data[i] = rng.uniform(-2.0, 2.0);
    }
    CHECK(gradient_check(weighted([&](Tape& t, Var x) { return max(x, t.constant(other)); }), sep, step) < tol);

    // matvec: the matrix side and the vector side.
    Tensor mat = random_tensor({4, 6}, rng);
    CHECK(gradient_check(
              [&](Tape& t, Var x) { return sum(matvec(t.constant(mat), x)); }, v, step) < tol);
    Tensor vec6 = random_tensor({6}, rng);
    CHECK(gradient_check(
              [&](Tape& t, Var x) { return sum(matvec(x, t.constant(vec6))); }, mat, step) < tol);
  }
}

TEST_CASE("scalar broadcast works for elementwise binaries") {
  Tape tape;
  Var s = tape.leaf(Tensor::scalar(2.0));
  Var v = tape.leaf(Tensor::vector({1.0, -1.0, 4.0}));
  CHECK(tape.value(add(s, v)).data[2] == 6.0);
  CHECK(tape.value(mul(v, s)).data[0] == 2.0);
  CHECK(tape.value(max(v, s)).data[1] == 2.0);

  Gradients g = tape.backward(sum(mul(s, v)));
  CHECK(g.at(s).data[0] == doctest::Approx(4.0));  // sum of v
  CHECK(g.at(v).data[0] == doctest::Approx(2.0));

  auto bcast = [](Tape& t, Var x) {
    return sum(mul(x, t.constant(Tensor::vector({1.0, 2.0, 3.0}))));
  };
  CHECK(gradient_check(bcast, Tensor::scalar(0.7), 1e-5) < 1e-6);
}

TEST_CASE("min composition picks the smaller branch") {
  Tape tape;
  Var a = tape.leaf(Tensor::scalar(2.0));
  Var b = tape.leaf(Tensor::scalar(5.0));
  CHECK(tape.value(min(a, b)).value() == 2.0);
  Gradients g = tape.backward(min(a, b));
  CHECK(g.at(a).data[0] == 1.0);
  CHECK(g.at(b).data[0] == 0.0);
}

TEST_CASE("tape slots are reusable after clear") {
  Tape tape;
  double first = 0.0;
  for (int round = 0; round < 3; ++round) {
    tape.clear();
    Var x = tape.leaf(Tensor::vector({1.0, 2.0, 3.0}));
    Var y = sum(mul(sigmoid(x), x));
    if (round == 0) {
      first = tape.value(y).value();
    } else {
      CHECK(tape.value(y).value() == first);
    }
    Gradients g = tape.backward(y);
    CHECK(g.contains(x));
  }
}

TEST_CASE("gradient_check reports non-finite intermediates with the coordinate") {
  const std::function<Var(Tape&, Var)> log_fn = [](Tape&, Var x) { return sum(log(x)); };
  // Perturbing coordinate 0 of {step/2, 1} goes negative -> NaN.
  Tensor bad = Tensor::vector({5e-6, 1.0});
  CHECK_THROWS_WITH_AS(gradient_check(log_fn, bad, 1e-5),
                       doctest::Contains("coordinate 0"), std::runtime_error);
}
