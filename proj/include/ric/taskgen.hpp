#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ric/rng.hpp"
#include "ric/simplex.hpp"

namespace ric {

enum class TaskKind { kGaussianMixture, kSeparableLinear, kRing };

TaskKind task_kind_from_string(const std::string& s);
std::string to_string(TaskKind k);

// Synthetic task description. `overlap` is the within-class spread relative
// to the class layout: it controls how ambiguous the conditional label
// distribution is (and thereby its mean entropy). For separable-linear it is
// reused as the enforced decision margin.
struct TaskSpec {
  TaskKind kind = TaskKind::kGaussianMixture;
  int num_classes = 2;
  int feature_dim = 2;
  double overlap = 1.0;
  double noise_rate = 0.0;
  int num_train = 1000;
  int num_val = 200;
  int num_test = 500;
  std::uint64_t seed = 0;

  void validate() const;
};

struct LabeledExample {
  Eigen::VectorXd features;
  int label = 0;
  std::optional<SimplexVector> bayes_posterior;
};

using ExampleList = std::vector<LabeledExample>;

struct Dataset {
  TaskSpec spec;
  ExampleList train, val, test;
  // Linear-classifier certificate for separable-linear tasks: row k scores
  // class k as weights.row(k).dot(x) + offsets[k].
  std::optional<Eigen::MatrixXd> separator_weights;
  std::optional<Eigen::VectorXd> separator_offsets;
};

// Deterministic given spec.seed. Labels are drawn from the analytic
// conditional label distribution, then flipped symmetrically at
// spec.noise_rate (train and val only; test labels stay clean).
Dataset generate(const TaskSpec& spec);

// Replace each label with a uniformly random different class w.p. rate.
// bayes_posterior fields are untouched: they describe the clean task.
void inject_label_noise(ExampleList& examples, double rate, Rng& rng);

// CSV rows: feature_0,...,feature_{d-1},label. A header row is written on
// save and tolerated on load.
ExampleList load_csv(const std::string& path, int feature_dim, int num_classes);
void save_csv(const ExampleList& examples, const std::string& path);

// Sidecar with the TaskSpec and, when available, per-row posteriors.
void save_sidecar_json(const Dataset& ds, const ExampleList& examples,
                       const std::string& path);

// Monte-Carlo estimate of the task's irreducible error rate
// E[1 - max_k q(k|x)] over fresh inputs.
double estimate_bayes_error(const TaskSpec& spec, int samples, std::uint64_t seed);

// Monte-Carlo estimate of E[H(q(.|x))] in nats over fresh inputs.
double estimate_mean_posterior_entropy(const TaskSpec& spec, int samples,
                                       std::uint64_t seed);

}  // namespace ric
