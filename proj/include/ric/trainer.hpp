#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ric/agent.hpp"
#include "ric/episodes.hpp"
#include "ric/taskgen.hpp"

namespace ric {

enum class OptimizerKind { kAdam, kSgd };
OptimizerKind optimizer_from_string(const std::string& s);
std::string to_string(OptimizerKind k);

struct TrainConfig {
  double gamma = 0.8;
  double gae_lambda = 0.95;
  int horizon = 20;
  int passes_per_snapshot = 5;
  double value_coef = 0.5;
  double clip_ratio = 0.2;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double learning_rate = 3e-4;
  double sgd_momentum = 0.9;
  double weight_decay = 0.001;
  double grad_clip_norm = 0.5;
  int batch_size = 128;
  int epochs = 100;
  std::uint64_t seed = 0;
  bool advantage_norm = true;        // per-batch zero mean, unit variance
  double divergence_bound = 1e4;     // abort when mean |log_prob| exceeds this
  int metric_bins = 15;
  int eval_max_examples = 1000;      // 0 = evaluate full splits every epoch
  bool halting_guard_first_step = true;

  void validate() const;
};

// Per-step GAE advantages and value-regression targets for one episode.
struct AdvantageEstimates {
  std::vector<double> advantages;
  std::vector<double> returns;
};

AdvantageEstimates gae(const Trajectory& traj, double gamma, double lambda);

// Clipped importance-ratio surrogate, negated for minimization. At
// params == params_old every ratio is exactly 1 and the gradient reduces to
// the plain score-function estimator.
double policy_surrogate(const std::vector<Trajectory>& batch, const AgentParams& params,
                        const AgentParams& params_old, double clip_ratio);

// Mean squared error between current values and the GAE return targets.
double value_loss(const std::vector<Trajectory>& batch, const AgentParams& params,
                  double gamma, double lambda);

// Tape-level builders used by the training loop (and by the convenience
// wrappers above). `logp_old` holds the behavior log-probs per episode/step.
struct BatchLoss {
  ad::Var policy;
  ad::Var value;
  ad::Var total;
};
BatchLoss build_batch_loss(const AgentVars& vars, const std::vector<Trajectory>& batch,
                           const std::vector<AdvantageEstimates>& estimates,
                           const std::vector<std::vector<double>>& logp_old,
                           double clip_ratio, double value_coef);

// Fixed metric schema: one row per (epoch, split).
struct MetricRow {
  int epoch = 0;
  std::string split;
  double accuracy = 0.0;
  double return_norm = 0.0;
  double ece = 0.0;
  double mean_confidence = 0.0;
  double mean_halt_step = 0.0;
  double classifier_norm = 0.0;  // diagnostics; not part of the metric CSV
};

void write_metrics_csv(const std::vector<MetricRow>& rows, const std::string& path);
std::vector<MetricRow> read_metrics_csv(const std::string& path);
void write_diagnostics_csv(const std::vector<MetricRow>& rows, const std::string& path);

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RicTrainResult {
  AgentParams params;
  std::vector<MetricRow> log;
  int skipped_updates = 0;
};

RicTrainResult train_ric(const Dataset& dataset, const AgentConfig& agent_cfg,
                         const TrainConfig& cfg);

// Single-pass baseline: same encoder, linear classifier, cross-entropy.
struct SupervisedParams {
  AgentConfig cfg;
  ad::Tensor enc_w1, enc_b1, enc_w2, enc_b2;
  ad::Tensor cls_w;

  static SupervisedParams init(const AgentConfig& cfg, Rng& rng);

  template <typename F>
  void for_each(F&& f) {
    f("enc_w1", enc_w1); f("enc_b1", enc_b1);
    f("enc_w2", enc_w2); f("enc_b2", enc_b2);
    f("cls_w", cls_w);
  }
};

SimplexVector supervised_predict(const SupervisedParams& params, const Eigen::VectorXd& x);

struct SupervisedTrainResult {
  SupervisedParams params;
  std::vector<MetricRow> log;
};

SupervisedTrainResult train_supervised(const Dataset& dataset, const AgentConfig& agent_cfg,
                                       const TrainConfig& cfg);

// Evaluation helpers shared by the trainers and the CLI.
MetricRow evaluate_ric(const AgentParams& params, const ExampleList& split,
                       const TrainConfig& cfg, int epoch, const std::string& split_name);
MetricRow evaluate_supervised(const SupervisedParams& params, const ExampleList& split,
                              const TrainConfig& cfg, int epoch, const std::string& split_name);

}  // namespace ric
