#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "ric/episodes.hpp"

using namespace ric;

namespace {

AgentParams make_agent(int k, int d, int h, std::uint64_t seed) {
  AgentConfig cfg;
  cfg.feature_dim = d;
  cfg.num_classes = k;
  cfg.hidden_dim = h;
  Rng rng(seed);
  return AgentParams::init(cfg, rng);
}

AgentParams value_frozen_agent(double value, std::uint64_t seed = 1) {
  AgentParams params = make_agent(3, 2, 8, seed);
  params.val_w.data.setZero();
  params.val_b.data[0] = value;
  return params;
}

Eigen::VectorXd input2(double a, double b) {
  Eigen::VectorXd x(2);
  x << a, b;
  return x;
}

}  // namespace

TEST_CASE("shaped reward is the log-score change") {
  CHECK(shaped_reward(0.25, 0.5) == doctest::Approx(0.6931471805599453).epsilon(1e-12));
  CHECK(shaped_reward(0.37, 0.37) == 0.0);
  CHECK(shaped_reward(0.5, 0.25) == doctest::Approx(-0.6931471805599453).epsilon(1e-12));
  CHECK_THROWS_AS(shaped_reward(0.0, 0.5), std::domain_error);
  CHECK_THROWS_AS(shaped_reward(0.5, 0.0), std::domain_error);
  CHECK_THROWS_AS(shaped_reward(1.5, 0.5), std::domain_error);
}

TEST_CASE("rollout produces a full trajectory whose rewards telescope") {
  AgentParams params = make_agent(4, 2, 12, 3);
  Rng rng(5);
  Trajectory traj = rollout(params, input2(0.3, -0.8), 2, 7, rng);
  REQUIRE(traj.steps.size() == 7);
  CHECK(traj.label == 2);

  const double telescoped =
      std::log(traj.steps.back().action[2]) - std::log(0.25);  // uniform prior over 4
  CHECK(std::abs(traj.total_reward() - telescoped) < 1e-9);
  CHECK(std::isfinite(traj.bootstrap_value));
  for (const auto& step : traj.steps) {
    CHECK(step.action.valid(1e-9));
    CHECK(step.action.interior());
    CHECK(std::isfinite(step.log_prob));
  }
  CHECK((traj.steps.front().prev_action.probs == 0.25).all());
}

TEST_CASE("a one-step rollout has exactly one action and reward") {
  AgentParams params = make_agent(2, 2, 8, 4);
  Rng rng(6);
  Trajectory traj = rollout(params, input2(1.0, 1.0), 0, 1, rng);
  CHECK(traj.steps.size() == 1);
  CHECK_THROWS_AS(rollout(params, input2(1.0, 1.0), 0, 0, rng), std::invalid_argument);
}

TEST_CASE("the label only touches rewards, never the network") {
  AgentParams params = make_agent(3, 2, 8, 7);
  const Eigen::VectorXd x = input2(0.4, 0.9);
  Rng r1(11), r2(11);
  Trajectory a = rollout(params, x, 0, 6, r1);
  Trajectory b = rollout(params, x, 2, 6, r2);
  for (size_t t = 0; t < a.steps.size(); ++t) {
    CHECK((a.steps[t].action.probs == b.steps[t].action.probs).all());
    CHECK(a.steps[t].value == b.steps[t].value);
    CHECK(a.steps[t].log_prob == b.steps[t].log_prob);
  }
  CHECK(a.total_reward() != b.total_reward());
}

TEST_CASE("non-finite states abort with the step index") {
  AgentParams params = make_agent(3, 2, 8, 8);
  params.gru_un.data[0] = std::numeric_limits<double>::quiet_NaN();
  Rng rng(9);
  CHECK_THROWS_WITH_AS(rollout(params, input2(0.1, 0.1), 0, 4, rng),
                       doctest::Contains("step 1"), std::runtime_error);
}

TEST_CASE("an untrained agent's mean-action refinement stays near the uniform prior") {
  AgentParams params = make_agent(10, 2, 32, 10);
  Rng rng(12);
  double mean_abs = 0.0;
  const int episodes = 1000;
  ad::Tape tape;
  for (int i = 0; i < episodes; ++i) {
    tape.clear();
    AgentVars vars = AgentVars::bind(tape, params);
    const Eigen::VectorXd x = input2(rng.normal(), rng.normal());
    RefinementTrace trace = deterministic_refine(vars, x, 10);
    // Telescoped mean-action return: log mu_T,y - log(1/K) for any y; the
    // worst class bounds them all.
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      worst = std::max(worst, std::abs(std::log(trace.mean_actions.back()[k]) - std::log(0.1)));
    }
    mean_abs += worst;
  }
  CHECK(mean_abs / episodes < 0.05);
}

TEST_CASE("replaying an episode under its own parameters is bit-exact") {
  AgentParams params = make_agent(3, 2, 16, 13);
  Rng rng(14);
  Trajectory traj = rollout(params, input2(-0.2, 0.5), 1, 8, rng);

  ad::Tape tape;
  AgentVars vars = AgentVars::bind(tape, params);
  EpisodeReplay replay = replay_episode(vars, traj);
  REQUIRE(replay.log_probs.size() == traj.steps.size());
  for (size_t t = 0; t < traj.steps.size(); ++t) {
    CHECK(tape.value(replay.log_probs[t]).value() == traj.steps[t].log_prob);
    CHECK(tape.value(replay.values[t]).value() == traj.steps[t].value);
  }
}

TEST_CASE("halting: a negative value head stops before the first refinement") {
  AgentParams params = value_frozen_agent(-1.0);
  HaltOptions opt{5, true};
  HaltingRecord rec = infer_with_halting(params, input2(0.3, 0.3), opt);
  CHECK(rec.halt_step == 1);
  CHECK(rec.values.size() == 1);
  // The returned prediction is the unrefined uniform prior.
  for (int k = 0; k < 3; ++k) CHECK(rec.prediction[k] == doctest::Approx(1.0 / 3));
}

TEST_CASE("halting: a positive value head runs to the step limit") {
  AgentParams params = value_frozen_agent(1.0);
  HaltOptions opt{6, true};
  HaltingRecord rec = infer_with_halting(params, input2(0.3, 0.3), opt);
  CHECK(rec.halt_step == 6);
  CHECK(rec.values.size() == 6);
  RefinementTrace trace = deterministic_refine(params, input2(0.3, 0.3), 6);
  CHECK((rec.prediction.probs == trace.mean_actions.back().probs).all());
}

TEST_CASE("halting: zero value means continue, and the first-step guard is switchable") {
  AgentParams params = value_frozen_agent(0.0);
  HaltOptions opt{4, true};
  CHECK(infer_with_halting(params, input2(0.1, 0.4), opt).halt_step == 4);

  AgentParams neg = value_frozen_agent(-0.5);
  HaltOptions unguarded{4, false};
  HaltingRecord rec = infer_with_halting(neg, input2(0.1, 0.4), unguarded);
  // First check happens at step 2: one refinement is always taken.
  CHECK(rec.halt_step == 2);
  RefinementTrace trace = deterministic_refine(neg, input2(0.1, 0.4), 4);
  CHECK((rec.prediction.probs == trace.mean_actions.front().probs).all());
}

TEST_CASE("flipping the frozen value's sign flips halt-at-one to never-halt") {
  for (double v : {0.7, 0.02}) {
    CHECK(infer_with_halting(value_frozen_agent(-v), input2(0.2, 0.2), {8, true}).halt_step == 1);
    CHECK(infer_with_halting(value_frozen_agent(v), input2(0.2, 0.2), {8, true}).halt_step == 8);
  }
}

TEST_CASE("geometric horizon sampling matches the distribution") {
  Rng rng(15);
  const int n = 1000000;
  double sum = 0.0;
  int ones = 0, beyond20 = 0;
  for (int i = 0; i < n; ++i) {
    const int draw = sample_geometric_horizon(0.8, rng);
    CHECK(draw >= 1);
    sum += draw;
    ones += draw == 1;
    beyond20 += draw > 20;
  }
  CHECK(sum / n == doctest::Approx(5.0).epsilon(0.004));            // 5.0 +/- 0.02
  CHECK(static_cast<double>(ones) / n == doctest::Approx(0.2).epsilon(0.01));
  CHECK(static_cast<double>(beyond20) / n ==
        doctest::Approx(std::pow(0.8, 20)).epsilon(0.05));
  CHECK_THROWS_AS(sample_geometric_horizon(1.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_geometric_horizon(0.0, rng), std::invalid_argument);
}

TEST_CASE("trajectory batches serialize to one JSON object per line") {
  AgentParams params = make_agent(3, 2, 8, 16);
  Rng rng(17);
  std::vector<Trajectory> batch;
  for (int i = 0; i < 3; ++i) {
    batch.push_back(rollout(params, input2(0.1 * i, -0.2), i % 3, 4, rng));
  }
  const std::string path = "/tmp/ric_episodes.jsonl";
  write_trajectories_jsonl(batch, path);

  std::ifstream in(path);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.at("steps").size() == 4);
    CHECK(j.at("label") == lines % 3);
    ++lines;
  }
  CHECK(lines == 3);
}
