#pragma once

#include <string>
#include <vector>

#include "ric/agent.hpp"

namespace ric {

// One refinement step of an episode. The reward is the change in log-score
// of the true class, so per-episode rewards telescope to the terminal
// log-score minus the prior's.
struct TrajectoryStep {
  SimplexVector prev_action;
  SimplexVector action;
  double log_prob = 0.0;  // under the parameters that produced the rollout
  double reward = 0.0;
  double value = 0.0;     // V(s_t) under the same parameters
  Eigen::ArrayXd thought; // tau_t
};

struct Trajectory {
  Eigen::VectorXd features;
  int label = 0;
  std::vector<TrajectoryStep> steps;
  double bootstrap_value = 0.0;  // V(s_{T+1})

  double total_reward() const {
    double s = 0.0;
    for (const auto& st : steps) s += st.reward;
    return s;
  }
};

double shaped_reward(double a_prev_y, double a_y);

// Samples one episode of `horizon` steps from the uniform prior and zero
// thought state. The label feeds rewards only; the network never sees it.
Trajectory rollout(const AgentParams& params, const Eigen::VectorXd& x, int label,
                   int horizon, Rng& rng);

// Same rollout against caller-managed tape bindings (the tape accumulates
// nodes; callers clear it between batches).
Trajectory rollout(const AgentVars& vars, const Eigen::VectorXd& x, int label,
                   int horizon, Rng& rng);

// Recomputed per-step quantities for a stored episode, differentiable w.r.t.
// the bound parameters. Replays the exact op sequence of rollout, so under
// the rollout's own parameters values match bit-for-bit.
struct EpisodeReplay {
  std::vector<ad::Var> log_probs;
  std::vector<ad::Var> values;
};
EpisodeReplay replay_episode(const AgentVars& vars, const Trajectory& traj);

// Deterministic (mean-action) refinement, no sampling, no halting.
struct RefinementTrace {
  std::vector<SimplexVector> mean_actions;  // mu_t, t = 1..max_steps
  std::vector<double> values;               // V(s_t), t = 1..max_steps
  std::vector<double> concentrations;       // c_t, t = 1..max_steps
};
RefinementTrace deterministic_refine(const AgentParams& params, const Eigen::VectorXd& x,
                                     int max_steps);
RefinementTrace deterministic_refine(const AgentVars& vars, const Eigen::VectorXd& x,
                                     int max_steps);

struct HaltOptions {
  int max_steps = 20;
  bool guard_first_step = true;  // value check also guards the first refinement
};

struct HaltingRecord {
  int halt_step = 0;              // >= 1
  SimplexVector prediction;       // mean action before the halting check fired
  std::vector<double> values;     // V observed at each checked step
};

// Value-based stopping over a precomputed trace: halt at the first checked
// step with V < 0 (ties continue), else run to max_steps.
HaltingRecord halting_from_trace(const RefinementTrace& trace, int num_classes,
                                 const HaltOptions& opt);
HaltingRecord infer_with_halting(const AgentParams& params, const Eigen::VectorXd& x,
                                 const HaltOptions& opt);

// P(N = t) = (1-gamma) gamma^(t-1), t >= 1.
int sample_geometric_horizon(double gamma, Rng& rng);

// Diagnostic dump, one JSON object per episode per line.
void write_trajectories_jsonl(const std::vector<Trajectory>& trajectories,
                              const std::string& path);

}  // namespace ric
