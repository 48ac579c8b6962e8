#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "ric/numerics.hpp"
#include "ric/theory.hpp"

using namespace ric;

TEST_CASE("bregman divergence of the negative log matches closed forms") {
  CHECK(bregman_divergence(0.5, 0.25) ==
        doctest::Approx(2.0 - std::log(2.0) - 1.0).epsilon(1e-12));
  for (double x : {0.1, 0.5, 0.9}) CHECK(bregman_divergence(x, x) == 0.0);
  CHECK(bregman_divergence(0.2, 0.9) > 0.0);
  CHECK_THROWS_AS(bregman_divergence(0.0, 0.5), std::domain_error);
  CHECK_THROWS_AS(bregman_divergence(0.5, 0.0), std::domain_error);
}

TEST_CASE("geometric stopping reproduces the discounted sum") {
  std::vector<Eigen::ArrayXd> sequences;
  sequences.push_back(Eigen::ArrayXd::Constant(32, 1.0));
  sequences.push_back(Eigen::ArrayXd::Zero(32));
  Rng rng(3);
  Eigen::ArrayXd random_seq(32);
  for (int t = 0; t < 32; ++t) random_seq[t] = rng.uniform01() < 0.5 ? -1.0 : 1.0;
  sequences.push_back(random_seq);

  const auto outcomes = verify_geometric_identity(sequences, 0.8, 200000, 7);
  REQUIRE(outcomes.size() == 3);
  // Constant rewards: the truncated series has the closed form below.
  CHECK(outcomes[0].target ==
        doctest::Approx(5.0 * (1.0 - std::pow(0.8, 32))).epsilon(1e-12));
  for (const auto& o : outcomes) {
    CAPTURE(o.claim);
    CHECK(o.pass);
  }
  // The all-zero sequence is exact on both sides.
  CHECK(outcomes[1].estimate == 0.0);
  CHECK(outcomes[1].target == 0.0);

  CHECK_THROWS_AS(verify_geometric_identity(sequences, 1.0, 10, 7), std::invalid_argument);
}

TEST_CASE("the log-mean gap identity holds for a symmetric concentration") {
  Eigen::ArrayXd alpha(2);
  alpha << 5.0, 5.0;
  const auto outcomes = verify_bregman_gap(alpha, 0, 200000, 11);
  REQUIRE(outcomes.size() == 4);
  for (const auto& o : outcomes) {
    CAPTURE(o.claim);
    CHECK(o.pass);
  }
  // Digamma closed form pins the left side independently.
  const auto& closed = outcomes[3];
  CHECK(closed.target == doctest::Approx(digamma(5.0) - digamma(10.0)).epsilon(1e-12));
}

TEST_CASE("the spread penalty shrinks like one over the concentration") {
  const auto outcomes = verify_quadratic_penalty(0.5, 200000, 13);
  REQUIRE(outcomes.size() == 4);
  for (const auto& o : outcomes) {
    CAPTURE(o.claim);
    CHECK(o.pass);
  }
  // Predicted penalty at c = 100: Var/(2 mu^2) with Var = mu(1-mu)/(c+1).
  CHECK(outcomes[0].target == doctest::Approx(0.25 / 101.0 / 0.5).epsilon(1e-12));
  CHECK_THROWS_AS(verify_quadratic_penalty(0.0, 100, 13), std::invalid_argument);
}

TEST_CASE("reward decomposition: a deterministic policy at q attains the entropy ceiling") {
  SimplexVector q(Eigen::ArrayXd(2));
  q.probs << 0.5, 0.5;
  DirichletParams policy;
  policy.mu = q;
  policy.c = 8.0;
  policy.alpha = q.probs * policy.c + 0.01;
  const auto outcomes = verify_reward_decomposition(q, policy, 100000, 17);
  const auto& det = outcomes[1];
  CHECK(det.claim == "reward_decomposition/deterministic_at_q");
  CHECK(det.estimate == doctest::Approx(-std::log(2.0)).epsilon(1e-12));
  CHECK(std::abs(det.estimate - det.target) <= 1e-9);
  CHECK(det.pass);
}

TEST_CASE("reward decomposition: the mean-misalignment term is the KL divergence") {
  SimplexVector q(Eigen::ArrayXd(2));
  q.probs << 0.7, 0.3;
  SimplexVector mu(Eigen::ArrayXd(2));
  mu.probs << 0.5, 0.5;
  CHECK(kl_divergence(q, mu) ==
        doctest::Approx(0.7 * std::log(1.4) + 0.3 * std::log(0.6)).epsilon(1e-12));
  CHECK(kl_divergence(q, mu) == doctest::Approx(0.082282).epsilon(1e-4));

  // Near-deterministic policy at mu: identity still holds within noise.
  DirichletParams policy;
  policy.mu = mu;
  policy.c = 1e4;
  policy.alpha = mu.probs * policy.c;
  const auto outcomes = verify_reward_decomposition(q, policy, 200000, 19);
  CHECK(outcomes[0].pass);
}

TEST_CASE("reward decomposition holds for random tasks and policies") {
  Rng rng(23);
  for (int trial = 0; trial < 3; ++trial) {
    const int k = 2 + static_cast<int>(rng.below(3));
    Eigen::ArrayXd qraw(k), mraw(k);
    for (int i = 0; i < k; ++i) {
      qraw[i] = rng.gamma(1.0);
      mraw[i] = rng.gamma(1.0);
    }
    SimplexVector q(Eigen::ArrayXd(qraw / qraw.sum()));
    DirichletParams policy;
    policy.mu = SimplexVector(Eigen::ArrayXd(mraw / mraw.sum()));
    policy.c = rng.uniform(1.0, 10.0);
    policy.alpha = policy.mu.probs * policy.c + 0.01;
    const auto outcomes = verify_reward_decomposition(q, policy, 200000, 100 + trial);
    CAPTURE(trial);
    CHECK(outcomes[0].pass);
  }
}

TEST_CASE("two-step features: ray analysis confirms the bounded-scale mechanism") {
  const TwoStepFeatures features = make_two_step_features();
  const auto outcomes = verify_finite_logit_scale(features, 0.8, {1, 2, 4, 8, 16, 32});
  REQUIRE(outcomes.size() == 5);
  for (const auto& o : outcomes) {
    CAPTURE(o.claim);
    CHECK(o.pass);
  }

  // The positive-part margin mass along (1,0) has an exact closed form:
  // mean of |u . w| over the four base points carried by both labels.
  const auto& margin = outcomes[2];
  CHECK(margin.claim == "finite_logit_scale/nonseparable_margin_positive");
  CHECK(margin.estimate == doctest::Approx((0.6 + 0.0 + 0.4 + 0.3) / 8.0).epsilon(1e-12));

  CHECK_THROWS_AS(verify_finite_logit_scale(features, 0.8, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("a non-separable late step is reported instead of failing the analysis") {
  TwoStepFeatures broken = make_two_step_features();
  broken.step2.row(0) = -broken.step2.row(0);  // label 0 point on the wrong side
  const auto outcomes = verify_finite_logit_scale(broken, 0.8, {1, 2, 4, 8, 16, 32});
  REQUIRE(outcomes.size() == 1);
  CHECK(outcomes[0].claim == "finite_logit_scale/late_step_separable");
  CHECK_FALSE(outcomes[0].pass);
  CHECK(outcomes[0].note.find("skipped") != std::string::npos);
}

TEST_CASE("optimal-target verification reports per-step divergence for any agent") {
  TaskSpec spec;
  spec.kind = TaskKind::kGaussianMixture;
  spec.num_classes = 3;
  spec.feature_dim = 2;
  spec.overlap = 0.9;
  spec.num_train = 10;
  spec.num_val = 10;
  spec.num_test = 60;
  spec.seed = 29;
  Dataset ds = generate(spec);

  AgentConfig cfg;
  cfg.feature_dim = 2;
  cfg.num_classes = 3;
  cfg.hidden_dim = 16;
  Rng rng(31);
  AgentParams params = AgentParams::init(cfg, rng);

  const auto outcomes = verify_optimal_target(params, ds.test, 6, 0.05, 0.1);
  REQUIRE(outcomes.size() == 3);
  CHECK(outcomes[0].claim == "optimal_target/per_step_tv");
  CHECK(outcomes[0].estimate >= 0.0);
  CHECK(outcomes[0].estimate <= 1.0);
  CHECK(outcomes[1].claim == "optimal_target/return_ceiling");
  CHECK(outcomes[1].estimate < outcomes[1].target);  // untrained: below the ceiling
  CHECK(outcomes[2].pass);                           // diagnostic never gates

  ExampleList no_posterior(1);
  no_posterior[0].features = ds.test[0].features;
  CHECK_THROWS_AS(verify_optimal_target(params, no_posterior, 6, 0.05, 0.1),
                  std::invalid_argument);
}

TEST_CASE("the train-free battery passes end to end and serializes to json") {
  const auto outcomes = run_theory_suite(41, 100000);
  CHECK(outcomes.size() >= 14);
  for (const auto& o : outcomes) {
    CAPTURE(o.claim);
    CHECK(o.pass);
    const auto j = nlohmann::json::parse(verification_outcome_json(o));
    CHECK(j.at("claim") == o.claim);
    CHECK(j.at("pass") == o.pass);
  }
}
