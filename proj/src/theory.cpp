#include "ric/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "ric/episodes.hpp"
#include "ric/numerics.hpp"

namespace ric {

namespace {

struct MonteCarloMean {
  double mean = 0.0;
  double stderr_est = 0.0;
};

template <typename F>
MonteCarloMean mc_mean(int samples, F&& draw) {
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double v = draw();
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / samples;
  const double var = std::max(0.0, sumsq / samples - mean * mean);
  return {mean, std::sqrt(var / samples)};
}

bool within(const VerificationOutcome& o) {
  return std::abs(o.estimate - o.target) <= std::max(3.0 * o.stderr_est, o.tolerance);
}

VerificationOutcome make_outcome(std::string claim, double estimate, double target,
                                 double stderr_est, double tolerance,
                                 std::string note = "") {
  VerificationOutcome o;
  o.claim = std::move(claim);
  o.estimate = estimate;
  o.target = target;
  o.stderr_est = stderr_est;
  o.tolerance = tolerance;
  o.note = std::move(note);
  o.pass = within(o);
  return o;
}

// mean -log softmax(scale * u . tau)_y with the second logit pinned at zero;
// m is the signed margin (positive = misclassified by |m|).
double two_class_ray_loss(const Eigen::MatrixXd& features, const std::vector<int>& labels,
                          const Eigen::VectorXd& u, double scale) {
  double loss = 0.0;
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    const double s = u.dot(features.row(i));
    const double m = scale * (labels[i] == 0 ? -s : s);
    loss += m > 0.0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
  }
  return loss / static_cast<double>(features.rows());
}

double margin_mass(const Eigen::MatrixXd& features, const std::vector<int>& labels,
                   const Eigen::VectorXd& u) {
  double c = 0.0;
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    const double s = u.dot(features.row(i));
    c += std::max(0.0, labels[i] == 0 ? -s : s);
  }
  return c / static_cast<double>(features.rows());
}

}  // namespace

std::string verification_outcome_json(const VerificationOutcome& o) {
  nlohmann::json j;
  j["claim"] = o.claim;
  j["estimate"] = o.estimate;
  j["target"] = o.target;
  j["stderr"] = o.stderr_est;
  j["tolerance"] = o.tolerance;
  j["pass"] = o.pass;
  if (!o.note.empty()) j["note"] = o.note;
  return j.dump();
}

double bregman_divergence(double x, double y) {
  if (!(x > 0.0) || !(y > 0.0)) {
    throw std::domain_error("bregman_divergence: arguments must be positive");
  }
  const double r = (x - y) / y;
  // Near the minimum the log1p form avoids cancellation; for x << y the
  // ratio form avoids (x-y)/y rounding to exactly -1.
  if (r > -0.5) return r - std::log1p(r);
  const double t = x / y;
  return t - std::log(t) - 1.0;
}

std::vector<VerificationOutcome> verify_geometric_identity(
    const std::vector<Eigen::ArrayXd>& reward_sequences, double gamma, int samples,
    std::uint64_t seed) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("verify_geometric_identity: gamma must be in (0,1)");
  }
  std::vector<VerificationOutcome> out;
  for (size_t s = 0; s < reward_sequences.size(); ++s) {
    const Eigen::ArrayXd& r = reward_sequences[s];
    const int horizon = static_cast<int>(r.size());

    double discounted = 0.0;
    double w = 1.0;
    for (int t = 0; t < horizon; ++t) {
      discounted += w * r[t];
      w *= gamma;
    }

    Rng rng = Rng::substream(seed, {21, s});
    MonteCarloMean mc = mc_mean(samples, [&] {
      const int n = std::min(sample_geometric_horizon(gamma, rng), horizon);
      double sum = 0.0;
      for (int t = 0; t < n; ++t) sum += r[t];
      return sum;
    });
    out.push_back(make_outcome("geometric_horizon/sequence_" + std::to_string(s), mc.mean,
                               discounted, mc.stderr_est, 0.0));
  }
  return out;
}

std::vector<VerificationOutcome> verify_bregman_gap(const Eigen::ArrayXd& alpha,
                                                    int target_class, int samples,
                                                    std::uint64_t seed) {
  const double alpha0 = alpha.sum();
  const double mu_y = alpha[target_class] / alpha0;

  Rng rng_lhs = Rng::substream(seed, {31});
  MonteCarloMean lhs = mc_mean(samples, [&] {
    return std::log(rng_lhs.dirichlet(alpha)[target_class]);
  });

  Rng rng_pen = Rng::substream(seed, {32});
  double min_df = std::numeric_limits<double>::infinity();
  MonteCarloMean penalty = mc_mean(samples, [&] {
    const double df = bregman_divergence(rng_pen.dirichlet(alpha)[target_class], mu_y);
    min_df = std::min(min_df, df);
    return df;
  });

  std::vector<VerificationOutcome> out;
  {
    VerificationOutcome o = make_outcome(
        "bregman_gap/identity", lhs.mean, std::log(mu_y) - penalty.mean,
        std::sqrt(lhs.stderr_est * lhs.stderr_est + penalty.stderr_est * penalty.stderr_est),
        0.0);
    out.push_back(std::move(o));
  }
  out.push_back(make_outcome("bregman_gap/pointwise_nonnegative", min_df, std::abs(min_df),
                             0.0, 1e-15, "estimate is the minimum sampled divergence"));
  {
    double worst = 0.0;
    for (double x : {0.1, 0.5, 0.9}) worst = std::max(worst, bregman_divergence(x, x));
    out.push_back(make_outcome("bregman_gap/self_divergence_zero", worst, 0.0, 0.0, 0.0));
  }
  out.push_back(make_outcome("bregman_gap/digamma_closed_form", lhs.mean,
                             digamma(alpha[target_class]) - digamma(alpha0),
                             lhs.stderr_est, 0.0));
  return out;
}

std::vector<VerificationOutcome> verify_quadratic_penalty(double mu_y, int samples,
                                                          std::uint64_t seed) {
  if (!(mu_y > 0.0 && mu_y < 1.0)) {
    throw std::invalid_argument("verify_quadratic_penalty: mu_y must be in (0,1)");
  }
  auto penalty_at = [&](double c, std::uint64_t tag) {
    Eigen::ArrayXd alpha(2);
    alpha << mu_y * c, (1.0 - mu_y) * c;
    Rng rng = Rng::substream(seed, {41, tag});
    return mc_mean(samples, [&] {
      return bregman_divergence(rng.dirichlet(alpha)[0], mu_y);
    });
  };

  const MonteCarloMean p100 = penalty_at(100.0, 100);
  const MonteCarloMean p200 = penalty_at(200.0, 200);
  const MonteCarloMean p400 = penalty_at(400.0, 400);
  const MonteCarloMean tail = penalty_at(1e4, 10000);

  std::vector<VerificationOutcome> out;
  const double predicted = mu_y * (1.0 - mu_y) / (100.0 + 1.0) / (2.0 * mu_y * mu_y);
  out.push_back(make_outcome("quadratic_penalty/variance_approximation_c100", p100.mean,
                             predicted, p100.stderr_est, 0.10 * predicted));

  out.push_back(make_outcome("quadratic_penalty/doubling_halves", p200.mean / p100.mean,
                             0.5, 0.0, 0.1));

  const double pc100 = p100.mean * 100.0;
  const double pc200 = p200.mean * 200.0;
  const double pc400 = p400.mean * 400.0;
  const double spread = std::max({pc100, pc200, pc400}) / std::min({pc100, pc200, pc400});
  out.push_back(make_outcome("quadratic_penalty/inverse_scale", spread, 1.0, 0.0, 0.2,
                             "max/min of penalty*c over c in {100,200,400}"));

  out.push_back(make_outcome("quadratic_penalty/deterministic_limit", tail.mean, 0.0,
                             0.0, 1e-4));
  return out;
}

std::vector<VerificationOutcome> verify_reward_decomposition(const SimplexVector& q,
                                                             const DirichletParams& policy,
                                                             int samples,
                                                             std::uint64_t seed) {
  if (!q.valid()) throw std::invalid_argument("verify_reward_decomposition: invalid q");
  const int k = q.size();
  const Eigen::ArrayXd& alpha = policy.alpha;
  const double alpha0 = alpha.sum();
  SimplexVector mean_action(Eigen::ArrayXd(alpha / alpha0));

  // Left side: y ~ q, a ~ policy.
  Rng rng_lhs = Rng::substream(seed, {51});
  MonteCarloMean lhs = mc_mean(samples, [&] {
    double u = rng_lhs.uniform01();
    int y = k - 1;
    for (int j = 0; j < k; ++j) {
      u -= q[j];
      if (u <= 0.0) {
        y = j;
        break;
      }
    }
    return std::log(rng_lhs.dirichlet(alpha)[y]);
  });

  // Spread penalty per class, combined under q.
  Rng rng_pen = Rng::substream(seed, {52});
  double penalty_mean = 0.0, penalty_var = 0.0;
  for (int y = 0; y < k; ++y) {
    if (q[y] == 0.0) continue;
    MonteCarloMean pen = mc_mean(samples, [&] {
      return bregman_divergence(rng_pen.dirichlet(alpha)[y], mean_action[y]);
    });
    penalty_mean += q[y] * pen.mean;
    penalty_var += q[y] * q[y] * pen.stderr_est * pen.stderr_est;
  }

  const double ceiling = -entropy(q);
  const double bias = kl_divergence(q, mean_action);

  std::vector<VerificationOutcome> out;
  out.push_back(make_outcome(
      "reward_decomposition/identity", lhs.mean, ceiling - bias - penalty_mean,
      std::sqrt(lhs.stderr_est * lhs.stderr_est + penalty_var), 0.0,
      "ceiling " + std::to_string(ceiling) + ", bias " + std::to_string(bias) +
          ", spread " + std::to_string(penalty_mean)));

  // Deterministic policy at the true distribution: both sides reduce to the
  // ceiling exactly.
  double direct = 0.0;
  for (int y = 0; y < k; ++y) {
    if (q[y] > 0.0) direct += q[y] * std::log(q[y]);
  }
  out.push_back(make_outcome("reward_decomposition/deterministic_at_q", direct, ceiling,
                             0.0, 1e-9));
  return out;
}

TwoStepFeatures make_two_step_features() {
  // Four base points, each carried by both labels: eight examples. Any
  // direction scores some of them on the wrong side, so the positive-part
  // margin mass is bounded away from zero along every ray.
  const Eigen::Matrix<double, 4, 2> base{
      {0.6, 0.0}, {0.0, 0.6}, {-0.4, 0.4}, {0.3, -0.5}};
  // Separable refined features along the first axis, margin >= 0.9.
  const Eigen::Matrix<double, 4, 2> refined{
      {1.0, 0.3}, {1.2, -0.2}, {0.9, 0.1}, {1.1, -0.3}};

  TwoStepFeatures f;
  f.step1.resize(8, 2);
  f.step2.resize(8, 2);
  f.labels.resize(8);
  for (int j = 0; j < 4; ++j) {
    for (int y = 0; y < 2; ++y) {
      const int i = 2 * j + y;
      f.step1.row(i) = base.row(j);
      // Class 0 sits on the positive side of the max-margin direction.
      if (y == 0) {
        f.step2.row(i) = refined.row(j);
      } else {
        f.step2.row(i) = -refined.row(j);
      }
      f.labels[i] = y;
    }
  }
  f.max_margin_direction = Eigen::Vector2d(1.0, 0.0);
  return f;
}

std::vector<VerificationOutcome> verify_finite_logit_scale(
    const TwoStepFeatures& features, double gamma, const std::vector<double>& scale_grid) {
  if (scale_grid.size() < 3) {
    throw std::invalid_argument("verify_finite_logit_scale: need at least 3 grid points");
  }
  std::vector<VerificationOutcome> out;
  const Eigen::VectorXd& u = features.max_margin_direction;

  // Precondition: the refined features must be separable along u.
  double worst_margin = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < features.step2.rows(); ++i) {
    const double s = u.dot(features.step2.row(i));
    worst_margin = std::min(worst_margin, features.labels[i] == 0 ? s : -s);
  }
  if (!(worst_margin > 0.0)) {
    out.push_back(make_outcome("finite_logit_scale/late_step_separable", worst_margin,
                               1.0, 0.0, 0.0,
                               "refined features not separable along the given "
                               "direction; remaining checks skipped"));
    return out;
  }

  const size_t n = scale_grid.size();
  std::vector<double> early(n), late(n), mixture(n);
  for (size_t i = 0; i < n; ++i) {
    early[i] = two_class_ray_loss(features.step1, features.labels, u, scale_grid[i]);
    late[i] = two_class_ray_loss(features.step2, features.labels, u, scale_grid[i]);
    // Refined features persist from step 2 on, so the geometric weights
    // collapse to P(N = 1) and P(N >= 2).
    mixture[i] = (1.0 - gamma) * early[i] + gamma * late[i];
  }

  double worst_late_delta = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i + 1 < n; ++i) {
    worst_late_delta = std::max(worst_late_delta, late[i + 1] - late[i]);
  }
  {
    VerificationOutcome o;
    o.claim = "finite_logit_scale/separable_loss_monotone";
    o.estimate = worst_late_delta;
    o.target = 0.0;
    o.pass = worst_late_delta < 0.0;
    o.note = "largest consecutive change of the single-step loss along the ray";
    out.push_back(std::move(o));
  }

  size_t arg_min = 0;
  for (size_t i = 1; i < n; ++i) {
    if (mixture[i] < mixture[arg_min]) arg_min = i;
  }
  {
    VerificationOutcome o;
    o.claim = "finite_logit_scale/interior_minimum";
    o.estimate = mixture.back() - mixture[arg_min];
    o.target = 0.0;
    o.pass = arg_min > 0 && arg_min + 1 < n && mixture.back() > mixture[arg_min];
    o.note = "minimum at scale " + std::to_string(scale_grid[arg_min]);
    out.push_back(std::move(o));
  }

  const double margin = margin_mass(features.step1, features.labels, u);
  {
    VerificationOutcome o;
    o.claim = "finite_logit_scale/nonseparable_margin_positive";
    o.estimate = margin;
    o.target = 0.0;
    o.pass = margin > 0.0;
    o.note = "expected positive part of the early-step margin";
    out.push_back(std::move(o));
  }

  double worst_slack = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < n; ++i) {
    worst_slack = std::min(worst_slack, early[i] - scale_grid[i] * margin);
  }
  {
    VerificationOutcome o;
    o.claim = "finite_logit_scale/early_loss_lower_bound";
    o.estimate = worst_slack;
    o.target = 0.0;
    o.pass = worst_slack >= -1e-12;
    o.note = "min over the grid of early-step loss minus scale * margin mass";
    out.push_back(std::move(o));
  }

  // Spot-check other rays: the margin mass stays positive and the mixture
  // turns upward. A handful of fixed directions cannot certify the
  // all-directions statement; they are a sample.
  bool rays_ok = true;
  const double phis[] = {0.4, 1.1, 1.9, 2.6, 3.4, 4.2, 5.0};
  for (double phi : phis) {
    Eigen::VectorXd dir(2);
    dir << std::cos(phi), std::sin(phi);
    if (!(margin_mass(features.step1, features.labels, dir) > 0.0)) rays_ok = false;
    const double lo = (1.0 - gamma) * two_class_ray_loss(features.step1, features.labels, dir, scale_grid[n / 2]) +
                      gamma * two_class_ray_loss(features.step2, features.labels, dir, scale_grid[n / 2]);
    const double hi = (1.0 - gamma) * two_class_ray_loss(features.step1, features.labels, dir, scale_grid.back() * 4.0) +
                      gamma * two_class_ray_loss(features.step2, features.labels, dir, scale_grid.back() * 4.0);
    if (!(hi > lo)) rays_ok = false;
  }
  {
    VerificationOutcome o;
    o.claim = "finite_logit_scale/sampled_rays_coercive";
    o.estimate = rays_ok ? 1.0 : 0.0;
    o.target = 1.0;
    o.pass = rays_ok;
    o.note = "sampled directions only; the all-directions condition is not "
             "exhaustively checkable";
    out.push_back(std::move(o));
  }
  return out;
}

std::vector<VerificationOutcome> verify_optimal_target(const AgentParams& params,
                                                       const ExampleList& examples,
                                                       int horizon, double tv_tolerance,
                                                       double return_tolerance) {
  if (examples.empty() || !examples[0].bayes_posterior) {
    throw std::invalid_argument("verify_optimal_target: examples must carry posteriors");
  }
  const int k = params.cfg.num_classes;
  const double log_k = std::log(static_cast<double>(k));

  std::vector<double> tv_sum(horizon, 0.0);
  double achieved = 0.0, ceiling = 0.0, c_sum = 0.0;

  ad::Tape tape;
  for (const auto& ex : examples) {
    const SimplexVector& q = *ex.bayes_posterior;
    tape.clear();
    AgentVars vars = AgentVars::bind(tape, params);
    RefinementTrace trace = deterministic_refine(vars, ex.features, horizon);
    for (int t = 0; t < horizon; ++t) {
      tv_sum[t] += total_variation(trace.mean_actions[t], q);
    }
    const SimplexVector& final_mu = trace.mean_actions.back();
    for (int y = 0; y < k; ++y) {
      if (q[y] > 0.0) achieved += q[y] * std::log(final_mu[y]);
    }
    ceiling += -entropy(q);
    c_sum += trace.concentrations.back();
  }

  const double n = static_cast<double>(examples.size());
  double worst_tv = 0.0;
  int worst_step = 0;
  for (int t = 0; t < horizon; ++t) {
    if (tv_sum[t] / n > worst_tv) {
      worst_tv = tv_sum[t] / n;
      worst_step = t + 1;
    }
  }

  std::vector<VerificationOutcome> out;
  out.push_back(make_outcome("optimal_target/per_step_tv", worst_tv, 0.0, 0.0,
                             tv_tolerance,
                             "worst step " + std::to_string(worst_step)));
  out.push_back(make_outcome("optimal_target/return_ceiling", achieved / n + log_k,
                             ceiling / n + log_k, 0.0, return_tolerance));
  {
    VerificationOutcome o;
    o.claim = "optimal_target/final_concentration";
    o.estimate = c_sum / n;
    o.target = params.cfg.c_max;
    o.pass = true;
    o.note = "diagnostic only: mean final-step concentration";
    out.push_back(std::move(o));
  }
  return out;
}

std::vector<VerificationOutcome> run_theory_suite(std::uint64_t seed, int samples) {
  std::vector<VerificationOutcome> out;

  {
    Rng rng = Rng::substream(seed, {61});
    std::vector<Eigen::ArrayXd> sequences;
    for (int s = 0; s < 3; ++s) {
      Eigen::ArrayXd r(32);
      for (int t = 0; t < 32; ++t) r[t] = rng.uniform(-1.0, 1.0);
      sequences.push_back(std::move(r));
    }
    auto res = verify_geometric_identity(sequences, 0.8, samples, seed);
    out.insert(out.end(), res.begin(), res.end());
  }
  {
    Eigen::ArrayXd alpha(3);
    alpha << 5.0, 3.0, 2.0;
    auto res = verify_bregman_gap(alpha, 0, samples, seed);
    out.insert(out.end(), res.begin(), res.end());
  }
  {
    auto res = verify_quadratic_penalty(0.5, samples, seed);
    out.insert(out.end(), res.begin(), res.end());
  }
  {
    SimplexVector q(Eigen::ArrayXd(3));
    q.probs << 0.5, 0.3, 0.2;
    DirichletParams policy;
    policy.mu = SimplexVector(Eigen::ArrayXd(3));
    policy.mu.probs << 0.4, 0.35, 0.25;
    policy.c = 6.0;
    policy.alpha = policy.mu.probs * policy.c + 0.01;
    auto res = verify_reward_decomposition(q, policy, samples, seed);
    out.insert(out.end(), res.begin(), res.end());
  }
  {
    auto res = verify_finite_logit_scale(make_two_step_features(), 0.8,
                                         {1, 2, 4, 8, 16, 32});
    out.insert(out.end(), res.begin(), res.end());
  }
  return out;
}

}  // namespace ric
