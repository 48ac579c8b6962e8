#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "ric/rng.hpp"
#include "ric/simplex.hpp"
#include "ric/tape.hpp"

namespace ric {

enum class Activation { kSilu, kRelu };
Activation activation_from_string(const std::string& s);
std::string to_string(Activation a);

struct AgentConfig {
  int feature_dim = 2;
  int num_classes = 2;
  int hidden_dim = 64;  // encoder output and thought state share this width
  Activation activation = Activation::kSilu;
  double c_min = 1.0;
  double c_max = 10.0;
  double alpha_eps = 0.01;
};

// One parameter set, reused at every refinement step: a two-layer MLP
// encoder, a GRU cell over [embedding; previous action], a shared linear
// classifier for the policy mean, and scalar concentration / value heads.
struct AgentParams {
  AgentConfig cfg;

  ad::Tensor enc_w1, enc_b1, enc_w2, enc_b2;
  ad::Tensor gru_wz, gru_uz, gru_bz;
  ad::Tensor gru_wr, gru_ur, gru_br;
  ad::Tensor gru_wn, gru_un, gru_bn;
  ad::Tensor cls_w;           // K x h shared classifier
  ad::Tensor conc_w, conc_b;  // concentration head
  ad::Tensor val_w, val_b;    // value head

  static AgentParams init(const AgentConfig& cfg, Rng& rng);

  // Fixed iteration order; checkpointing, the optimizer, and tape binding
  // all rely on it.
  template <typename F>
  void for_each(F&& f) {
    f("enc_w1", enc_w1); f("enc_b1", enc_b1);
    f("enc_w2", enc_w2); f("enc_b2", enc_b2);
    f("gru_wz", gru_wz); f("gru_uz", gru_uz); f("gru_bz", gru_bz);
    f("gru_wr", gru_wr); f("gru_ur", gru_ur); f("gru_br", gru_br);
    f("gru_wn", gru_wn); f("gru_un", gru_un); f("gru_bn", gru_bn);
    f("cls_w", cls_w);
    f("conc_w", conc_w); f("conc_b", conc_b);
    f("val_w", val_w); f("val_b", val_b);
  }
  template <typename F>
  void for_each(F&& f) const {
    const_cast<AgentParams*>(this)->for_each(
        [&](const char* name, ad::Tensor& t) { f(name, static_cast<const ad::Tensor&>(t)); });
  }

  std::int64_t parameter_count() const;
};

// Tape bindings of the parameter tensors, created once per tape and shared by
// every forward evaluation recorded on it.
struct AgentVars {
  ad::Var enc_w1, enc_b1, enc_w2, enc_b2;
  ad::Var gru_wz, gru_uz, gru_bz;
  ad::Var gru_wr, gru_ur, gru_br;
  ad::Var gru_wn, gru_un, gru_bn;
  ad::Var cls_w;
  ad::Var conc_w, conc_b;
  ad::Var val_w, val_b;
  AgentConfig cfg;

  static AgentVars bind(ad::Tape& tape, const AgentParams& params);
};

// Policy distribution: alpha_k = mu_k * c + eps with mu on the simplex and
// c squashed into [c_min, c_max].
struct DirichletParams {
  SimplexVector mu;
  double c = 0.0;
  Eigen::ArrayXd alpha;
};

struct PolicyVars {
  ad::Var mu;     // simplex vector
  ad::Var c;      // scalar
  ad::Var alpha;  // vector
};

// Forward pieces. All of them read the input only through x / the previous
// action / the previous thought state; labels never enter.
ad::Var encode(const AgentVars& p, const Eigen::VectorXd& x);
ad::Var think_step(const AgentVars& p, ad::Var embedding, ad::Var tau_prev, ad::Var a_prev);
PolicyVars policy_head(const AgentVars& p, ad::Var tau);
ad::Var value_head(const AgentVars& p, ad::Var tau);

// Dirichlet log-density of a fixed interior action, differentiable in alpha.
ad::Var dirichlet_log_prob(ad::Var alpha, const SimplexVector& action);

// Plain-value helpers.
DirichletParams extract_policy(const ad::Tape& tape, const PolicyVars& pv);
SimplexVector sample_action(const DirichletParams& d, Rng& rng);
double dirichlet_log_pdf(const Eigen::ArrayXd& alpha, const SimplexVector& action);
SimplexVector deterministic_action(const DirichletParams& d);

// Checkpoints: JSON manifest (config, shapes, optional RNG state) next to a
// flat little-endian float64 blob. Round-trips are bit-exact.
void save_checkpoint(const AgentParams& params, const std::string& path_prefix,
                     const std::string& rng_state = "");
AgentParams load_checkpoint(const std::string& path_prefix, std::string* rng_state = nullptr);

}  // namespace ric
