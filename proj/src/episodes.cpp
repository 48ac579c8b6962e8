#include "ric/episodes.hpp"

#include <cassert>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace ric {

namespace {

using ad::Tensor;
using ad::Var;

struct StepOut {
  Var tau;
  PolicyVars policy;
  Var value;
};

// One refinement step: thought update, then both heads. Rollout and replay
// must call this identically so recomputed values are bit-equal.
StepOut step_forward(const AgentVars& vars, Var embedding, Var tau_prev, Var a_prev) {
  StepOut out;
  out.tau = think_step(vars, embedding, tau_prev, a_prev);
  out.policy = policy_head(vars, out.tau);
  out.value = value_head(vars, out.tau);
  return out;
}

Var action_constant(ad::Tape& tape, const SimplexVector& a) {
  return tape.constant_vector(a.probs);
}

}  // namespace

double shaped_reward(double a_prev_y, double a_y) {
  if (!(a_prev_y > 0.0) || !(a_y > 0.0) || a_prev_y > 1.0 || a_y > 1.0) {
    throw std::domain_error("shaped_reward: probabilities must lie in (0,1]");
  }
  return std::log(a_y) - std::log(a_prev_y);
}

Trajectory rollout(const AgentParams& params, const Eigen::VectorXd& x, int label,
                   int horizon, Rng& rng) {
  ad::Tape tape;
  AgentVars vars = AgentVars::bind(tape, params);
  return rollout(vars, x, label, horizon, rng);
}

Trajectory rollout(const AgentVars& vars, const Eigen::VectorXd& x, int label,
                   int horizon, Rng& rng) {
  if (horizon < 1) throw std::invalid_argument("rollout: horizon must be >= 1");
  if (label < 0 || label >= vars.cfg.num_classes) {
    throw std::invalid_argument("rollout: label out of range");
  }
  ad::Tape& tape = *vars.cls_w.tape;
  const int k = vars.cfg.num_classes;

  Trajectory traj;
  traj.features = x;
  traj.label = label;
  traj.steps.reserve(horizon);

  Var embedding = encode(vars, x);
  Var tau = tape.constant_vector(Eigen::ArrayXd::Zero(vars.cfg.hidden_dim));
  SimplexVector a_prev = SimplexVector::uniform(k);

  for (int t = 1; t <= horizon; ++t) {
    StepOut step = step_forward(vars, embedding, tau, action_constant(tape, a_prev));
    if (!tape.value(step.tau).all_finite()) {
      throw std::runtime_error("rollout: non-finite thought state at step " +
                               std::to_string(t));
    }
    DirichletParams policy = extract_policy(tape, step.policy);
    SimplexVector action = sample_action(policy, rng);
    Var lp = dirichlet_log_prob(step.policy.alpha, action);

    TrajectoryStep rec;
    rec.prev_action = a_prev;
    rec.action = action;
    rec.log_prob = tape.value(lp).value();
    rec.reward = shaped_reward(a_prev[label], action[label]);
    rec.value = tape.value(step.value).value();
    rec.thought = tape.value(step.tau).data;
    traj.steps.push_back(std::move(rec));

    tau = step.tau;
    a_prev = action;
  }

  // Bootstrap from the state reached after the final action.
  StepOut tail = step_forward(vars, embedding, tau, action_constant(tape, a_prev));
  traj.bootstrap_value = tape.value(tail.value).value();

  assert(std::abs(traj.total_reward() -
                  (std::log(traj.steps.back().action[label]) - std::log(1.0 / k))) < 1e-9);
  return traj;
}

EpisodeReplay replay_episode(const AgentVars& vars, const Trajectory& traj) {
  ad::Tape& tape = *vars.cls_w.tape;
  EpisodeReplay out;
  out.log_probs.reserve(traj.steps.size());
  out.values.reserve(traj.steps.size());

  Var embedding = encode(vars, traj.features);
  Var tau = tape.constant_vector(Eigen::ArrayXd::Zero(vars.cfg.hidden_dim));
  for (const auto& step : traj.steps) {
    StepOut s = step_forward(vars, embedding, tau, action_constant(tape, step.prev_action));
    out.log_probs.push_back(dirichlet_log_prob(s.policy.alpha, step.action));
    out.values.push_back(s.value);
    tau = s.tau;
  }
  return out;
}

RefinementTrace deterministic_refine(const AgentParams& params, const Eigen::VectorXd& x,
                                     int max_steps) {
  ad::Tape tape;
  AgentVars vars = AgentVars::bind(tape, params);
  return deterministic_refine(vars, x, max_steps);
}

RefinementTrace deterministic_refine(const AgentVars& vars, const Eigen::VectorXd& x,
                                     int max_steps) {
  if (max_steps < 1) throw std::invalid_argument("deterministic_refine: max_steps must be >= 1");
  ad::Tape& tape = *vars.cls_w.tape;

  RefinementTrace trace;
  trace.mean_actions.reserve(max_steps);
  trace.values.reserve(max_steps);

  Var embedding = encode(vars, x);
  Var tau = tape.constant_vector(Eigen::ArrayXd::Zero(vars.cfg.hidden_dim));
  SimplexVector a_prev = SimplexVector::uniform(vars.cfg.num_classes);
  for (int t = 1; t <= max_steps; ++t) {
    StepOut step = step_forward(vars, embedding, tau, action_constant(tape, a_prev));
    trace.values.push_back(tape.value(step.value).value());
    DirichletParams policy = extract_policy(tape, step.policy);
    trace.concentrations.push_back(policy.c);
    SimplexVector mu = deterministic_action(policy);
    trace.mean_actions.push_back(mu);
    tau = step.tau;
    a_prev = std::move(mu);
  }
  return trace;
}

HaltingRecord halting_from_trace(const RefinementTrace& trace, int num_classes,
                                 const HaltOptions& opt) {
  const int max_steps = static_cast<int>(trace.values.size());
  HaltingRecord rec;
  for (int t = 1; t <= max_steps; ++t) {
    rec.values.push_back(trace.values[t - 1]);
    const bool guarded = opt.guard_first_step || t > 1;
    if (guarded && trace.values[t - 1] < 0.0) {
      rec.halt_step = t;
      rec.prediction = t == 1 ? SimplexVector::uniform(num_classes)
                              : trace.mean_actions[t - 2];
      return rec;
    }
  }
  rec.halt_step = max_steps;
  rec.prediction = trace.mean_actions.back();
  return rec;
}

HaltingRecord infer_with_halting(const AgentParams& params, const Eigen::VectorXd& x,
                                 const HaltOptions& opt) {
  RefinementTrace trace = deterministic_refine(params, x, opt.max_steps);
  return halting_from_trace(trace, params.cfg.num_classes, opt);
}

int sample_geometric_horizon(double gamma, Rng& rng) {
  if (!(gamma > 0.0) || !(gamma < 1.0)) {
    throw std::invalid_argument("sample_geometric_horizon: gamma must be in (0,1)");
  }
  const double u = rng.uniform01();
  return 1 + static_cast<int>(std::floor(std::log(u) / std::log(gamma)));
}

void write_trajectories_jsonl(const std::vector<Trajectory>& trajectories,
                              const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_trajectories_jsonl: cannot open " + path);
  for (const auto& traj : trajectories) {
    nlohmann::json j;
    j["label"] = traj.label;
    j["features"] = std::vector<double>(traj.features.data(),
                                        traj.features.data() + traj.features.size());
    j["bootstrap_value"] = traj.bootstrap_value;
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : traj.steps) {
      steps.push_back({
          {"action", std::vector<double>(s.action.probs.data(),
                                         s.action.probs.data() + s.action.size())},
          {"log_prob", s.log_prob},
          {"reward", s.reward},
          {"value", s.value},
      });
    }
    j["steps"] = std::move(steps);
    out << j.dump() << "\n";
  }
}

}  // namespace ric
