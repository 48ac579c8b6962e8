#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ric/agent.hpp"
#include "ric/taskgen.hpp"

namespace ric {

// One numeric claim check. pass iff |estimate - target| <= max(3*stderr,
// tolerance); deterministic checks carry stderr 0.
struct VerificationOutcome {
  std::string claim;
  double estimate = 0.0;
  double target = 0.0;
  double stderr_est = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string note;
};

std::string verification_outcome_json(const VerificationOutcome& o);

// D_F(x || y) for F(x) = -log x: x/y - log(x/y) - 1, nonnegative, zero iff
// x == y.
double bregman_divergence(double x, double y);

// Discounted-sum vs geometric-stopping equivalence on fixed bounded reward
// sequences: one outcome per sequence.
std::vector<VerificationOutcome> verify_geometric_identity(
    const std::vector<Eigen::ArrayXd>& reward_sequences, double gamma, int samples,
    std::uint64_t seed);

// Mean/log-mean gap of a Dirichlet coordinate: identity, pointwise
// nonnegativity, self-divergence, and the digamma closed form.
std::vector<VerificationOutcome> verify_bregman_gap(const Eigen::ArrayXd& alpha,
                                                    int target_class, int samples,
                                                    std::uint64_t seed);

// Second-order behavior of the spread penalty at large concentration:
// variance approximation, halving under doubled c, 1/c scaling, and the
// deterministic limit.
std::vector<VerificationOutcome> verify_quadratic_penalty(double mu_y, int samples,
                                                          std::uint64_t seed);

// Three-term split of the expected per-step log-score into entropy ceiling,
// mean misalignment, and spread penalty.
std::vector<VerificationOutcome> verify_reward_decomposition(const SimplexVector& q,
                                                             const DirichletParams& policy,
                                                             int samples,
                                                             std::uint64_t seed);

// Fixed two-step feature sets for the logit-scale analysis: step-1 features
// carry both labels on identical points (every direction misclassifies part
// of the mass by a margin), step-2 features are linearly separable.
struct TwoStepFeatures {
  Eigen::MatrixXd step1;  // n x d
  Eigen::MatrixXd step2;  // n x d
  std::vector<int> labels;            // in {0,1}
  Eigen::VectorXd max_margin_direction;
};
TwoStepFeatures make_two_step_features();

// Deterministic ray analysis of the shared two-class classifier (last logit
// pinned to zero): the single-step separable loss decreases monotonically
// along the max-margin ray while the geometric mixture turns upward, with
// the early-step loss lower-bounded by scale * positive margin mass.
std::vector<VerificationOutcome> verify_finite_logit_scale(
    const TwoStepFeatures& features, double gamma, const std::vector<double>& scale_grid);

// Trained-agent check against the analytic conditional label distribution:
// per-step total variation and the achieved-return gap to the entropy
// ceiling. Examples must carry posteriors.
std::vector<VerificationOutcome> verify_optimal_target(const AgentParams& params,
                                                       const ExampleList& examples,
                                                       int horizon, double tv_tolerance,
                                                       double return_tolerance);

// The train-free verifier battery behind the verify-theory CLI subcommand.
std::vector<VerificationOutcome> run_theory_suite(std::uint64_t seed, int samples);

}  // namespace ric
