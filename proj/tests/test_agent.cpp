#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "ric/agent.hpp"
#include "ric/episodes.hpp"
#include "ric/numerics.hpp"
#include "test_support.hpp"

using namespace ric;
using ad::Tape;
using ad::Tensor;
using ad::Var;

namespace {

AgentConfig small_cfg(int k = 3, int d = 2, int h = 8) {
  AgentConfig cfg;
  cfg.feature_dim = d;
  cfg.num_classes = k;
  cfg.hidden_dim = h;
  return cfg;
}

AgentParams random_agent(const AgentConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  return AgentParams::init(cfg, rng);
}

void zero_all(AgentParams& p) {
  p.for_each([](const char*, Tensor& t) { t.data.setZero(); });
}

}  // namespace

TEST_CASE("encode is deterministic and zero weights give the zero embedding") {
  AgentParams params = random_agent(small_cfg(), 1);
  Eigen::VectorXd x(2);
  x << 0.4, -1.2;

  Tape t1, t2;
  AgentVars v1 = AgentVars::bind(t1, params);
  AgentVars v2 = AgentVars::bind(t2, params);
  CHECK((t1.value(encode(v1, x)).data == t2.value(encode(v2, x)).data).all());

  AgentParams zeros = params;
  zero_all(zeros);
  Tape t3;
  AgentVars v3 = AgentVars::bind(t3, zeros);
  // silu(0) = 0 applied elementwise to a zero pre-activation
  CHECK((t3.value(encode(v3, x)).data == 0.0).all());

  Eigen::VectorXd wrong(3);
  wrong.setZero();
  CHECK_THROWS_AS(encode(v1, wrong), ad::ShapeError);
}

TEST_CASE("encode gradient matches central differences") {
  AgentParams params = random_agent(small_cfg(3, 2, 8), 2);
  Eigen::VectorXd x(2);
  x << 1.1, 0.3;
  Rng rng(3);
  const double err = ric_test::params_grad_max_rel_err(
      params,
      [&](Tape&, const AgentVars& v) { return ad::sum(ad::mul(encode(v, x), encode(v, x))); },
      1e-5, 40, rng);
  CHECK(err < 1e-5);
}

TEST_CASE("think_step from the zero state is well defined and gate saturation freezes it") {
  AgentConfig cfg = small_cfg();
  AgentParams params = random_agent(cfg, 4);
  Eigen::VectorXd x(2);
  x << -0.3, 0.9;

  Tape tape;
  AgentVars vars = AgentVars::bind(tape, params);
  Var emb = encode(vars, x);
  Var tau0 = tape.constant_vector(Eigen::ArrayXd::Zero(cfg.hidden_dim));
  Var a0 = tape.constant_vector(SimplexVector::uniform(cfg.num_classes).probs);
  Var tau1 = think_step(vars, emb, tau0, a0);
  CHECK(tape.value(tau1).all_finite());
  CHECK(tape.value(tau1).size() == cfg.hidden_dim);

  // Saturate the update gate: tau stays put regardless of the input.
  AgentParams frozen = params;
  frozen.gru_bz.data.setConstant(60.0);
  Tape t2;
  AgentVars v2 = AgentVars::bind(t2, frozen);
  Var emb2 = encode(v2, x);
  Eigen::ArrayXd prev = Eigen::ArrayXd::LinSpaced(cfg.hidden_dim, -0.5, 0.5);
  Var tau_prev = t2.constant_vector(prev);
  Var tau_next = think_step(v2, emb2, tau_prev, t2.constant_vector(SimplexVector::uniform(3).probs));
  CHECK((t2.value(tau_next).data - prev).abs().maxCoeff() < 1e-12);
}

TEST_CASE("policy head: zero weights give the uniform mean and alpha = c/K + eps") {
  AgentConfig cfg = small_cfg(4, 2, 8);
  AgentParams params = random_agent(cfg, 5);
  zero_all(params);
  Tape tape;
  AgentVars vars = AgentVars::bind(tape, params);
  Var tau = tape.constant_vector(Eigen::ArrayXd::Random(cfg.hidden_dim));
  PolicyVars pv = policy_head(vars, tau);
  DirichletParams d = extract_policy(tape, pv);
  for (int k = 0; k < 4; ++k) CHECK(d.mu[k] == doctest::Approx(0.25).epsilon(1e-12));
  // sigmoid(0) = 0.5 -> c at the midpoint of [1, 10]
  CHECK(d.c == doctest::Approx(5.5).epsilon(1e-12));
  for (int k = 0; k < 4; ++k) {
    CHECK(d.alpha[k] == doctest::Approx(5.5 * 0.25 + 0.01).epsilon(1e-12));
  }
}

TEST_CASE("concentration squash saturates inside [1, 10]") {
  AgentConfig cfg = small_cfg(2, 2, 4);
  AgentParams params = random_agent(cfg, 6);
  zero_all(params);
  // One unit weight turns tau[0] into the raw head output.
  params.conc_w.data[0] = 1.0;

  auto c_for_raw = [&](double raw) {
    Tape tape;
    AgentVars vars = AgentVars::bind(tape, params);
    Eigen::ArrayXd tau = Eigen::ArrayXd::Zero(cfg.hidden_dim);
    tau[0] = raw;
    PolicyVars pv = policy_head(vars, tape.constant_vector(tau));
    return extract_policy(tape, pv).c;
  };

  CHECK(c_for_raw(25.0) == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(c_for_raw(-25.0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(c_for_raw(-3.0) == doctest::Approx(1.0 + 9.0 / (1.0 + std::exp(3.0))).epsilon(1e-12));
  for (double raw : {-100.0, -1.0, 0.0, 2.5, 100.0}) {
    const double c = c_for_raw(raw);
    CHECK(c >= 1.0);
    CHECK(c <= 10.0);
  }
}

TEST_CASE("value head: zero weights give zero and the gradient checks out") {
  AgentConfig cfg = small_cfg();
  AgentParams zeros = random_agent(cfg, 7);
  zero_all(zeros);
  Tape tape;
  AgentVars vars = AgentVars::bind(tape, zeros);
  Var tau = tape.constant_vector(Eigen::ArrayXd::Random(cfg.hidden_dim));
  CHECK(tape.value(value_head(vars, tau)).value() == 0.0);

  AgentParams params = random_agent(cfg, 8);
  Eigen::VectorXd x(2);
  x << 0.2, -0.7;
  Rng rng(9);
  const double err = ric_test::params_grad_max_rel_err(
      params,
      [&](Tape& t, const AgentVars& v) {
        Var emb = encode(v, x);
        Var tau0 = t.constant_vector(Eigen::ArrayXd::Zero(cfg.hidden_dim));
        Var a0 = t.constant_vector(SimplexVector::uniform(cfg.num_classes).probs);
        return value_head(v, think_step(v, emb, tau0, a0));
      },
      1e-5, 40, rng);
  CHECK(err < 1e-5);
}

TEST_CASE("dirichlet sampling: symmetric alpha matches the uniform moments") {
  Rng rng(10);
  DirichletParams d;
  d.alpha = Eigen::ArrayXd::Constant(3, 1.0);
  Eigen::ArrayXd mean = Eigen::ArrayXd::Zero(3);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    SimplexVector a = sample_action(d, rng);
    CHECK((a.probs > 0.0).all());
    mean += a.probs;
  }
  mean /= n;
  for (int k = 0; k < 3; ++k) CHECK(mean[k] == doctest::Approx(1.0 / 3).epsilon(0.03));
}

TEST_CASE("dirichlet coordinate variance follows mu(1-mu)/(c+1)") {
  Rng rng(11);
  DirichletParams d;
  d.alpha = Eigen::ArrayXd(2);
  d.alpha << 4.5, 4.5;  // mu = 0.5, c = 9
  double sum = 0.0, sumsq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double a = sample_action(d, rng)[0];
    sum += a;
    sumsq += a * a;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(var == doctest::Approx(0.025).epsilon(0.08));  // 0.025 +/- 0.002
}

TEST_CASE("sampled dirichlet mean recovers alpha over its sum") {
  AgentConfig cfg = small_cfg(3, 2, 8);
  AgentParams params = random_agent(cfg, 12);
  Tape tape;
  AgentVars vars = AgentVars::bind(tape, params);
  Var tau = tape.constant_vector(Eigen::ArrayXd::Random(cfg.hidden_dim) * 2.0);
  DirichletParams d = extract_policy(tape, policy_head(vars, tau));

  Rng rng(13);
  Eigen::ArrayXd mean = Eigen::ArrayXd::Zero(3);
  const int n = 100000;
  for (int i = 0; i < n; ++i) mean += sample_action(d, rng).probs;
  mean /= n;
  const Eigen::ArrayXd expected = d.alpha / d.alpha.sum();
  for (int k = 0; k < 3; ++k) CHECK(std::abs(mean[k] - expected[k]) < 0.005);
}

TEST_CASE("dirichlet log density matches closed forms") {
  // Symmetric alpha = 1: the density is the constant Gamma(3) = 2 on the
  // 2-simplex.
  Eigen::ArrayXd ones = Eigen::ArrayXd::Constant(3, 1.0);
  SimplexVector a(Eigen::ArrayXd(3));
  a.probs << 0.2, 0.5, 0.3;
  CHECK(dirichlet_log_pdf(ones, a) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  Eigen::ArrayXd beta(2);
  beta << 2.0, 1.0;
  SimplexVector b(Eigen::ArrayXd(2));
  b.probs << 0.75, 0.25;
  CHECK(dirichlet_log_pdf(beta, b) == doctest::Approx(std::log(1.5)).epsilon(1e-12));

  // Taped version agrees with the plain one and rejects boundary actions.
  Tape tape;
  Var alpha = tape.leaf(Tensor::vector({2.0, 1.0}));
  CHECK(tape.value(dirichlet_log_prob(alpha, b)).value() ==
        doctest::Approx(dirichlet_log_pdf(beta, b)).epsilon(1e-14));
  SimplexVector boundary(Eigen::ArrayXd(2));
  boundary.probs << 1.0, 0.0;
  CHECK_THROWS_AS(dirichlet_log_prob(alpha, boundary), std::domain_error);
  CHECK_THROWS_AS(dirichlet_log_pdf(beta, boundary), std::domain_error);
}

TEST_CASE("dirichlet density integrates to one on the 2-simplex") {
  // Importance sampling against the uniform distribution on the simplex.
  Eigen::ArrayXd alpha(3);
  alpha << 2.0, 3.0, 1.5;
  Eigen::ArrayXd uniform_alpha = Eigen::ArrayXd::Constant(3, 1.0);
  Rng rng(14);
  DirichletParams uniform;
  uniform.alpha = uniform_alpha;
  double integral = 0.0;
  const int n = 400000;
  for (int i = 0; i < n; ++i) {
    SimplexVector a = sample_action(uniform, rng);
    integral += std::exp(dirichlet_log_pdf(alpha, a)) / 2.0;  // uniform density = 2
  }
  integral /= n;
  CHECK(integral == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("log prob gradient with respect to alpha matches finite differences") {
  SimplexVector a(Eigen::ArrayXd(3));
  a.probs << 0.6, 0.3, 0.1;
  auto f = [&](Tape&, Var alpha) { return dirichlet_log_prob(alpha, a); };
  CHECK(ad::gradient_check(f, Tensor::vector({2.0, 0.7, 1.4}), 1e-5) < 1e-6);
}

TEST_CASE("deterministic action is the normalized concentration") {
  DirichletParams d;
  d.alpha = Eigen::ArrayXd(2);
  d.alpha << 1.0, 1.0;
  SimplexVector m = deterministic_action(d);
  CHECK(m[0] == 0.5);
  CHECK(m[1] == 0.5);

  d.alpha << 9.01, 1.01;  // mu = (0.9, 0.1), c = 10, eps = 0.01
  m = deterministic_action(d);
  CHECK(m[0] == doctest::Approx(9.01 / 10.02).epsilon(1e-15));
  CHECK(m[1] == doctest::Approx(1.01 / 10.02).epsilon(1e-15));
  CHECK(m.valid(1e-12));
}

TEST_CASE("one parameter set serves any horizon") {
  AgentConfig cfg = small_cfg();
  AgentParams params = random_agent(cfg, 15);
  const std::int64_t count = params.parameter_count();
  Eigen::VectorXd x(2);
  x << 0.1, 0.2;
  Rng r1(1), r2(2);
  rollout(params, x, 0, 3, r1);
  rollout(params, x, 0, 11, r2);
  CHECK(params.parameter_count() == count);  // horizon never touches the shapes
}

TEST_CASE("five-step unrolled gradients match central differences") {
  AgentConfig cfg = small_cfg(3, 2, 16);
  AgentParams params = random_agent(cfg, 16);
  Eigen::VectorXd x(2);
  x << 0.8, -0.4;
  Rng roll_rng(17);
  Trajectory traj = rollout(params, x, 1, 5, roll_rng);

  Rng coeff_rng(18);
  std::vector<double> cp(5), cv(5);
  for (int t = 0; t < 5; ++t) {
    cp[t] = coeff_rng.uniform(-1.0, 1.0);
    cv[t] = coeff_rng.uniform(-1.0, 1.0);
  }

  auto build = [&](Tape& t, const AgentVars& v) {
    EpisodeReplay replay = replay_episode(v, traj);
    Var acc = t.constant(0.0);
    for (int s = 0; s < 5; ++s) {
      acc = acc + ad::scale(replay.log_probs[s], cp[s]) + ad::scale(replay.values[s], cv[s]);
    }
    return acc;
  };

  // Step 1e-4 keeps the roundoff of the difference quotient below the
  // tolerance; the objective's magnitude makes 1e-5 noise-limited.
  Rng pick_rng(19);
  CHECK(ric_test::params_grad_max_rel_err(params, build, 1e-4, 60, pick_rng) < 1e-4);
}

TEST_CASE("checkpoints round-trip bit-exactly") {
  AgentConfig cfg = small_cfg(4, 3, 12);
  AgentParams params = random_agent(cfg, 20);
  const std::string prefix = "/tmp/ric_agent_ckpt";
  Rng rng(21);
  rng.raw();
  save_checkpoint(params, prefix, rng.state_string());

  std::string rng_state;
  AgentParams loaded = load_checkpoint(prefix, &rng_state);
  CHECK(loaded.cfg.num_classes == 4);
  CHECK(loaded.cfg.hidden_dim == 12);

  bool identical = true;
  std::vector<const Tensor*> a, b;
  params.for_each([&](const char*, const Tensor& t) { a.push_back(&t); });
  loaded.for_each([&](const char*, const Tensor& t) { b.push_back(&t); });
  for (size_t i = 0; i < a.size(); ++i) {
    identical = identical && (a[i]->data == b[i]->data).all() && a[i]->shape == b[i]->shape;
  }
  CHECK(identical);

  Rng restored(0);
  restored.set_state(rng_state);
  CHECK(restored.raw() == rng.raw());

  // Saving the loaded params reproduces the blob byte for byte.
  save_checkpoint(loaded, prefix + "_2", rng_state);
  std::ifstream f1(prefix + ".bin", std::ios::binary);
  std::ifstream f2(prefix + "_2.bin", std::ios::binary);
  std::string blob1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  std::string blob2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(blob1 == blob2);
  CHECK_FALSE(blob1.empty());
}
