#include "ric/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <thread>

#include "ric/metrics.hpp"

namespace ric {

namespace {

using ad::Tensor;
using ad::Var;

// Seed-path tags for named substreams.
constexpr std::uint64_t kStreamInit = 1;
constexpr std::uint64_t kStreamShuffle = 2;
constexpr std::uint64_t kStreamRollout = 3;

int worker_count() {
  static const int cached = [] {
    unsigned hw = std::thread::hardware_concurrency();
    int n = hw == 0 ? 1 : static_cast<int>(hw);
    if (const char* env = std::getenv("RIC_LAB_THREADS")) {
      const int cap = std::atoi(env);
      if (cap >= 1) n = std::min(n, cap);
    }
    return n;
  }();
  return cached;
}

std::vector<Var> agent_leaves(const AgentVars& v) {
  // Must match AgentParams::for_each order.
  return {v.enc_w1, v.enc_b1, v.enc_w2, v.enc_b2,
          v.gru_wz, v.gru_uz, v.gru_bz,
          v.gru_wr, v.gru_ur, v.gru_br,
          v.gru_wn, v.gru_un, v.gru_bn,
          v.cls_w, v.conc_w, v.conc_b, v.val_w, v.val_b};
}

std::vector<Tensor*> agent_tensors(AgentParams& p) {
  std::vector<Tensor*> out;
  p.for_each([&](const char*, Tensor& t) { out.push_back(&t); });
  return out;
}

std::vector<Tensor*> supervised_tensors(SupervisedParams& p) {
  std::vector<Tensor*> out;
  p.for_each([&](const char*, Tensor& t) { out.push_back(&t); });
  return out;
}

// Adam (weight decay added to the gradient, torch-style) or SGD+momentum.
class Optimizer {
 public:
  Optimizer(const TrainConfig& cfg, const std::vector<Tensor*>& params) : cfg_(cfg) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const Tensor* t : params) {
      m_.push_back(Eigen::ArrayXd::Zero(t->size()));
      v_.push_back(Eigen::ArrayXd::Zero(t->size()));
    }
  }

  void step(const std::vector<Tensor*>& params, std::vector<Tensor>& grads) {
    clip_global_norm(grads);
    ++t_;
    for (size_t i = 0; i < params.size(); ++i) {
      Eigen::ArrayXd g = grads[i].data + cfg_.weight_decay * params[i]->data;
      if (cfg_.optimizer == OptimizerKind::kAdam) {
        m_[i] = 0.9 * m_[i] + 0.1 * g;
        v_[i] = 0.999 * v_[i] + 0.001 * g.square();
        const double mc = 1.0 - std::pow(0.9, static_cast<double>(t_));
        const double vc = 1.0 - std::pow(0.999, static_cast<double>(t_));
        params[i]->data -=
            cfg_.learning_rate * (m_[i] / mc) / ((v_[i] / vc).sqrt() + 1e-8);
      } else {
        m_[i] = cfg_.sgd_momentum * m_[i] + g;
        params[i]->data -= cfg_.learning_rate * m_[i];
      }
    }
  }

 private:
  void clip_global_norm(std::vector<Tensor>& grads) const {
    if (!(cfg_.grad_clip_norm > 0.0)) return;
    double sq = 0.0;
    for (const Tensor& g : grads) sq += g.data.square().sum();
    const double norm = std::sqrt(sq);
    if (norm > cfg_.grad_clip_norm) {
      const double s = cfg_.grad_clip_norm / norm;
      for (Tensor& g : grads) g.data *= s;
    }
  }

  TrainConfig cfg_;
  std::vector<Eigen::ArrayXd> m_, v_;
  long t_ = 0;
};

std::vector<Tensor> collect_grads(const ad::Gradients& grads, const std::vector<Var>& leaves,
                                  const ad::Tape& tape) {
  std::vector<Tensor> out;
  out.reserve(leaves.size());
  for (Var leaf : leaves) {
    out.push_back(grads.contains(leaf) ? grads.at(leaf)
                                       : Tensor::zeros(tape.value(leaf).shape));
  }
  return out;
}

std::vector<int> shuffled_indices(int n, Rng& rng) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(order[i], order[j]);
  }
  return order;
}

double frobenius_norm(const Tensor& t) { return std::sqrt(t.data.square().sum()); }

// Rolls out one minibatch under the snapshot parameters. Each episode owns a
// substream keyed by (seed, epoch, example index), so results do not depend
// on scheduling; with several workers the batch is split into fixed chunks.
std::vector<Trajectory> collect_rollouts(const AgentParams& snapshot,
                                         const ExampleList& examples,
                                         const std::vector<int>& batch_indices,
                                         const TrainConfig& cfg, int epoch) {
  std::vector<Trajectory> batch(batch_indices.size());
  auto run_chunk = [&](size_t begin, size_t end) {
    // Clearing per episode keeps the tape's slot sequence aligned across
    // episodes, so recording reuses buffers instead of allocating.
    ad::Tape tape;
    for (size_t i = begin; i < end; ++i) {
      const LabeledExample& ex = examples[batch_indices[i]];
      Rng rng = Rng::substream(cfg.seed, {kStreamRollout, static_cast<std::uint64_t>(epoch),
                                          static_cast<std::uint64_t>(batch_indices[i])});
      tape.clear();
      AgentVars vars = AgentVars::bind(tape, snapshot);
      batch[i] = rollout(vars, ex.features, ex.label, cfg.horizon, rng);
    }
  };

  const int workers = std::min<int>(worker_count(), static_cast<int>(batch.size()));
  if (workers <= 1) {
    run_chunk(0, batch.size());
  } else {
    std::vector<std::thread> pool;
    const size_t chunk = (batch.size() + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const size_t begin = w * chunk;
      const size_t end = std::min(batch.size(), begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(run_chunk, begin, end);
    }
    for (auto& t : pool) t.join();
  }
  return batch;
}

}  // namespace

OptimizerKind optimizer_from_string(const std::string& s) {
  if (s == "adam") return OptimizerKind::kAdam;
  if (s == "sgd") return OptimizerKind::kSgd;
  throw std::invalid_argument("unknown optimizer: " + s);
}

std::string to_string(OptimizerKind k) {
  return k == OptimizerKind::kAdam ? "adam" : "sgd";
}

void TrainConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("TrainConfig: gamma must be in (0,1)");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) {
    throw std::invalid_argument("TrainConfig: gae_lambda must be in [0,1]");
  }
  if (horizon < 1) throw std::invalid_argument("TrainConfig: horizon must be >= 1");
  if (passes_per_snapshot < 1) throw std::invalid_argument("TrainConfig: passes must be >= 1");
  if (!(clip_ratio > 0.0)) throw std::invalid_argument("TrainConfig: clip ratio must be positive");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch size must be >= 1");
  if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs must be nonnegative");
}

AdvantageEstimates gae(const Trajectory& traj, double gamma, double lambda) {
  const int horizon = static_cast<int>(traj.steps.size());
  AdvantageEstimates est;
  est.advantages.resize(horizon);
  est.returns.resize(horizon);
  double next_value = traj.bootstrap_value;
  double acc = 0.0;
  for (int t = horizon - 1; t >= 0; --t) {
    const double delta = traj.steps[t].reward + gamma * next_value - traj.steps[t].value;
    acc = delta + gamma * lambda * acc;
    est.advantages[t] = acc;
    est.returns[t] = acc + traj.steps[t].value;
    next_value = traj.steps[t].value;
  }
  return est;
}

BatchLoss build_batch_loss(const AgentVars& vars, const std::vector<Trajectory>& batch,
                           const std::vector<AdvantageEstimates>& estimates,
                           const std::vector<std::vector<double>>& logp_old,
                           double clip_ratio, double value_coef) {
  ad::Tape& tape = *vars.cls_w.tape;
  Var lo = tape.constant(1.0 - clip_ratio);
  Var hi = tape.constant(1.0 + clip_ratio);

  Var policy_sum = tape.constant(0.0);
  Var value_sum = tape.constant(0.0);
  int total_steps = 0;
  for (size_t e = 0; e < batch.size(); ++e) {
    EpisodeReplay replay = replay_episode(vars, batch[e]);
    for (size_t t = 0; t < batch[e].steps.size(); ++t) {
      Var ratio = ad::exp(replay.log_probs[t] - tape.constant(logp_old[e][t]));
      Var adv = tape.constant(estimates[e].advantages[t]);
      Var clipped = ad::max(ad::min(ratio, hi), lo);
      policy_sum = policy_sum + ad::min(ratio * adv, clipped * adv);

      Var err = replay.values[t] - tape.constant(estimates[e].returns[t]);
      value_sum = value_sum + err * err;
      ++total_steps;
    }
  }
  BatchLoss loss;
  loss.policy = ad::scale(policy_sum, -1.0 / total_steps);
  loss.value = ad::scale(value_sum, 1.0 / total_steps);
  loss.total = loss.policy + ad::scale(loss.value, value_coef);
  return loss;
}

double policy_surrogate(const std::vector<Trajectory>& batch, const AgentParams& params,
                        const AgentParams& params_old, double clip_ratio) {
  // Behavior log-probs under params_old, recomputed on a scratch tape.
  std::vector<std::vector<double>> logp_old(batch.size());
  {
    ad::Tape tape;
    AgentVars old_vars = AgentVars::bind(tape, params_old);
    for (size_t e = 0; e < batch.size(); ++e) {
      EpisodeReplay replay = replay_episode(old_vars, batch[e]);
      for (Var lp : replay.log_probs) logp_old[e].push_back(tape.value(lp).value());
    }
  }
  const TrainConfig defaults{};
  std::vector<AdvantageEstimates> estimates;
  estimates.reserve(batch.size());
  for (const auto& traj : batch) {
    estimates.push_back(gae(traj, defaults.gamma, defaults.gae_lambda));
  }

  ad::Tape tape;
  AgentVars vars = AgentVars::bind(tape, params);
  BatchLoss loss = build_batch_loss(vars, batch, estimates, logp_old, clip_ratio, 0.0);
  return tape.value(loss.policy).value();
}

double value_loss(const std::vector<Trajectory>& batch, const AgentParams& params,
                  double gamma, double lambda) {
  ad::Tape tape;
  AgentVars vars = AgentVars::bind(tape, params);
  double sum = 0.0;
  int total = 0;
  for (const auto& traj : batch) {
    const AdvantageEstimates est = gae(traj, gamma, lambda);
    EpisodeReplay replay = replay_episode(vars, traj);
    for (size_t t = 0; t < traj.steps.size(); ++t) {
      const double err = tape.value(replay.values[t]).value() - est.returns[t];
      sum += err * err;
      ++total;
    }
  }
  return sum / total;
}

MetricRow evaluate_ric(const AgentParams& params, const ExampleList& split,
                       const TrainConfig& cfg, int epoch, const std::string& split_name) {
  const int n = cfg.eval_max_examples > 0
                    ? std::min<int>(cfg.eval_max_examples, static_cast<int>(split.size()))
                    : static_cast<int>(split.size());
  if (n == 0) throw std::invalid_argument("evaluate_ric: empty split");
  const double log_k = std::log(static_cast<double>(params.cfg.num_classes));

  std::vector<Prediction> predictions;
  predictions.reserve(n);
  double return_norm = 0.0;
  double halt_sum = 0.0;
  HaltOptions halt{cfg.horizon, cfg.halting_guard_first_step};

  ad::Tape tape;
  for (int i = 0; i < n; ++i) {
    const LabeledExample& ex = split[i];
    tape.clear();
    AgentVars vars = AgentVars::bind(tape, params);
    RefinementTrace trace = deterministic_refine(vars, ex.features, cfg.horizon);
    const SimplexVector& final_mu = trace.mean_actions.back();
    predictions.push_back(Prediction{final_mu, ex.label});
    return_norm += (std::log(final_mu[ex.label]) + log_k) / log_k;
    halt_sum += halting_from_trace(trace, params.cfg.num_classes, halt).halt_step;
  }

  const CalibrationReport report = ece(predictions, cfg.metric_bins);
  MetricRow row;
  row.epoch = epoch;
  row.split = split_name;
  row.accuracy = report.accuracy;
  row.return_norm = return_norm / n;
  row.ece = report.ece;
  row.mean_confidence = report.mean_confidence;
  row.mean_halt_step = halt_sum / n;
  row.classifier_norm = frobenius_norm(params.cls_w);
  return row;
}

RicTrainResult train_ric(const Dataset& dataset, const AgentConfig& agent_cfg,
                         const TrainConfig& cfg) {
  cfg.validate();
  if (dataset.train.empty()) throw std::invalid_argument("train_ric: empty training set");

  Rng init_rng = Rng::substream(cfg.seed, {kStreamInit});
  RicTrainResult result;
  result.params = AgentParams::init(agent_cfg, init_rng);

  std::vector<Tensor*> tensors = agent_tensors(result.params);
  Optimizer opt(cfg, tensors);

  const int n = static_cast<int>(dataset.train.size());
  AgentParams snapshot = result.params;
  ad::Tape update_tape;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (epoch % cfg.passes_per_snapshot == 0) snapshot = result.params;

    Rng shuffle_rng = Rng::substream(cfg.seed, {kStreamShuffle, static_cast<std::uint64_t>(epoch)});
    const std::vector<int> order = shuffled_indices(n, shuffle_rng);

    bool checked_snapshot = false;
    for (int start = 0; start < n; start += cfg.batch_size) {
      const int end = std::min(n, start + cfg.batch_size);
      std::vector<int> batch_indices(order.begin() + start, order.begin() + end);
      std::vector<Trajectory> batch =
          collect_rollouts(snapshot, dataset.train, batch_indices, cfg, epoch);

      // Behavior-policy discipline: stored log-probs must be reproducible
      // from the snapshot exactly.
      if (!checked_snapshot) {
        ad::Tape check_tape;
        AgentVars check_vars = AgentVars::bind(check_tape, snapshot);
        EpisodeReplay replay = replay_episode(check_vars, batch[0]);
        for (size_t t = 0; t < batch[0].steps.size(); ++t) {
          if (check_tape.value(replay.log_probs[t]).value() != batch[0].steps[t].log_prob) {
            throw std::logic_error("train_ric: snapshot log-prob mismatch");
          }
        }
        checked_snapshot = true;
      }

      double mean_abs_logp = 0.0;
      int total_steps = 0;
      std::vector<AdvantageEstimates> estimates;
      std::vector<std::vector<double>> logp_old;
      estimates.reserve(batch.size());
      logp_old.reserve(batch.size());
      for (const auto& traj : batch) {
        estimates.push_back(gae(traj, cfg.gamma, cfg.gae_lambda));
        logp_old.emplace_back();
        for (const auto& step : traj.steps) {
          logp_old.back().push_back(step.log_prob);
          mean_abs_logp += std::abs(step.log_prob);
          ++total_steps;
        }
      }
      mean_abs_logp /= total_steps;
      if (!(mean_abs_logp < cfg.divergence_bound)) {
        throw TrainingDiverged("train_ric: mean |log_prob| " + std::to_string(mean_abs_logp) +
                               " exceeds bound at epoch " + std::to_string(epoch));
      }

      if (cfg.advantage_norm) {
        double mean = 0.0;
        for (const auto& est : estimates) {
          for (double a : est.advantages) mean += a;
        }
        mean /= total_steps;
        double var = 0.0;
        for (const auto& est : estimates) {
          for (double a : est.advantages) var += (a - mean) * (a - mean);
        }
        const double sd = std::sqrt(var / total_steps) + 1e-8;
        for (auto& est : estimates) {
          for (double& a : est.advantages) a = (a - mean) / sd;
        }
      }

      update_tape.clear();
      AgentVars vars = AgentVars::bind(update_tape, result.params);
      BatchLoss loss =
          build_batch_loss(vars, batch, estimates, logp_old, cfg.clip_ratio, cfg.value_coef);
      if (!std::isfinite(update_tape.value(loss.total).value())) {
        ++result.skipped_updates;
        std::cerr << "train_ric: skipping non-finite update at epoch " << epoch << "\n";
        continue;
      }
      ad::Gradients grads = update_tape.backward(loss.total);
      std::vector<Tensor> grad_list = collect_grads(grads, agent_leaves(vars), update_tape);
      opt.step(tensors, grad_list);
    }

    result.log.push_back(evaluate_ric(result.params, dataset.train, cfg, epoch, "train"));
    if (!dataset.val.empty()) {
      result.log.push_back(evaluate_ric(result.params, dataset.val, cfg, epoch, "val"));
    }
  }
  return result;
}

SupervisedParams SupervisedParams::init(const AgentConfig& cfg, Rng& rng) {
  // Matches the agent encoder init so comparisons start from the same place.
  AgentParams agent = AgentParams::init(cfg, rng);
  SupervisedParams p;
  p.cfg = cfg;
  p.enc_w1 = agent.enc_w1;
  p.enc_b1 = agent.enc_b1;
  p.enc_w2 = agent.enc_w2;
  p.enc_b2 = agent.enc_b2;
  p.cls_w = agent.cls_w;
  return p;
}

namespace {

struct SupervisedVars {
  Var enc_w1, enc_b1, enc_w2, enc_b2, cls_w;
  AgentConfig cfg;
};

SupervisedVars bind_supervised(ad::Tape& tape, const SupervisedParams& params) {
  SupervisedVars v;
  v.cfg = params.cfg;
  v.enc_w1 = tape.leaf(params.enc_w1);
  v.enc_b1 = tape.leaf(params.enc_b1);
  v.enc_w2 = tape.leaf(params.enc_w2);
  v.enc_b2 = tape.leaf(params.enc_b2);
  v.cls_w = tape.leaf(params.cls_w);
  return v;
}

Var supervised_forward(const SupervisedVars& v, const Eigen::VectorXd& x) {
  AgentVars shim;
  shim.cfg = v.cfg;
  shim.enc_w1 = v.enc_w1;
  shim.enc_b1 = v.enc_b1;
  shim.enc_w2 = v.enc_w2;
  shim.enc_b2 = v.enc_b2;
  return ad::softmax(ad::matvec(v.cls_w, encode(shim, x)));
}

}  // namespace

SimplexVector supervised_predict(const SupervisedParams& params, const Eigen::VectorXd& x) {
  ad::Tape tape;
  SupervisedVars vars = bind_supervised(tape, params);
  return SimplexVector(tape.value(supervised_forward(vars, x)).data);
}

MetricRow evaluate_supervised(const SupervisedParams& params, const ExampleList& split,
                              const TrainConfig& cfg, int epoch,
                              const std::string& split_name) {
  const int n = cfg.eval_max_examples > 0
                    ? std::min<int>(cfg.eval_max_examples, static_cast<int>(split.size()))
                    : static_cast<int>(split.size());
  if (n == 0) throw std::invalid_argument("evaluate_supervised: empty split");
  const double log_k = std::log(static_cast<double>(params.cfg.num_classes));

  std::vector<Prediction> predictions;
  predictions.reserve(n);
  double return_norm = 0.0;
  ad::Tape tape;
  for (int i = 0; i < n; ++i) {
    tape.clear();
    SupervisedVars vars = bind_supervised(tape, params);
    SimplexVector probs(tape.value(supervised_forward(vars, split[i].features)).data);
    return_norm +=
        (std::log(std::max(probs[split[i].label], 1e-300)) + log_k) / log_k;
    predictions.push_back(Prediction{std::move(probs), split[i].label});
  }

  const CalibrationReport report = ece(predictions, cfg.metric_bins);
  MetricRow row;
  row.epoch = epoch;
  row.split = split_name;
  row.accuracy = report.accuracy;
  row.return_norm = return_norm / n;
  row.ece = report.ece;
  row.mean_confidence = report.mean_confidence;
  row.mean_halt_step = 1.0;
  row.classifier_norm = frobenius_norm(params.cls_w);
  return row;
}

SupervisedTrainResult train_supervised(const Dataset& dataset, const AgentConfig& agent_cfg,
                                       const TrainConfig& cfg) {
  cfg.validate();
  if (dataset.train.empty()) throw std::invalid_argument("train_supervised: empty training set");

  Rng init_rng = Rng::substream(cfg.seed, {kStreamInit});
  SupervisedTrainResult result;
  result.params = SupervisedParams::init(agent_cfg, init_rng);

  std::vector<Tensor*> tensors = supervised_tensors(result.params);
  Optimizer opt(cfg, tensors);

  const int n = static_cast<int>(dataset.train.size());
  ad::Tape tape;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng = Rng::substream(cfg.seed, {kStreamShuffle, static_cast<std::uint64_t>(epoch)});
    const std::vector<int> order = shuffled_indices(n, shuffle_rng);

    for (int start = 0; start < n; start += cfg.batch_size) {
      const int end = std::min(n, start + cfg.batch_size);
      tape.clear();
      SupervisedVars vars = bind_supervised(tape, result.params);
      Var loss_sum = tape.constant(0.0);
      for (int i = start; i < end; ++i) {
        const LabeledExample& ex = dataset.train[order[i]];
        Var probs = supervised_forward(vars, ex.features);
        loss_sum = loss_sum - ad::log(ad::pick(probs, ex.label));
      }
      Var loss = ad::scale(loss_sum, 1.0 / (end - start));
      if (!std::isfinite(tape.value(loss).value())) {
        std::cerr << "train_supervised: skipping non-finite update at epoch " << epoch << "\n";
        continue;
      }
      ad::Gradients grads = tape.backward(loss);
      std::vector<Var> leaves{vars.enc_w1, vars.enc_b1, vars.enc_w2, vars.enc_b2, vars.cls_w};
      std::vector<Tensor> grad_list = collect_grads(grads, leaves, tape);
      opt.step(tensors, grad_list);
    }

    result.log.push_back(
        evaluate_supervised(result.params, dataset.train, cfg, epoch, "train"));
    if (!dataset.val.empty()) {
      result.log.push_back(
          evaluate_supervised(result.params, dataset.val, cfg, epoch, "val"));
    }
  }
  return result;
}

void write_metrics_csv(const std::vector<MetricRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_metrics_csv: cannot open " + path);
  out << "# ric-metrics-v1\n";
  out << "epoch,split,accuracy,return_norm,ece,mean_confidence,mean_halt_step\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%s,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.epoch,
                  r.split.c_str(), r.accuracy, r.return_norm, r.ece, r.mean_confidence,
                  r.mean_halt_step);
    out << buf;
  }
}

std::vector<MetricRow> read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_metrics_csv: cannot open " + path);
  std::vector<MetricRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("epoch,", 0) == 0) continue;
    std::stringstream ss(line);
    std::string field;
    MetricRow row;
    std::getline(ss, field, ',');
    row.epoch = std::stoi(field);
    std::getline(ss, row.split, ',');
    std::getline(ss, field, ',');
    row.accuracy = std::stod(field);
    std::getline(ss, field, ',');
    row.return_norm = std::stod(field);
    std::getline(ss, field, ',');
    row.ece = std::stod(field);
    std::getline(ss, field, ',');
    row.mean_confidence = std::stod(field);
    std::getline(ss, field, ',');
    row.mean_halt_step = std::stod(field);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_diagnostics_csv(const std::vector<MetricRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_diagnostics_csv: cannot open " + path);
  out << "# ric-diagnostics-v1\n";
  out << "epoch,split,classifier_norm\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%s,%.17g\n", r.epoch, r.split.c_str(),
                  r.classifier_norm);
    out << buf;
  }
}

}  // namespace ric
