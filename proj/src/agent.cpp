#include "ric/agent.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "ric/numerics.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint blobs are little-endian");

namespace ric {

namespace {

using json = nlohmann::json;
using ad::Tensor;
using ad::Var;

Tensor random_matrix(int rows, int cols, double stddev, Rng& rng) {
  Eigen::ArrayXd data(static_cast<Eigen::Index>(rows) * cols);
  for (Eigen::Index i = 0; i < data.size(); ++i) data[i] = stddev * rng.normal();
  return Tensor::matrix(rows, cols, std::move(data));
}

Var activate(const AgentVars& p, Var x) {
  return p.cfg.activation == Activation::kSilu ? ad::silu(x) : ad::relu(x);
}

}  // namespace

Activation activation_from_string(const std::string& s) {
  if (s == "silu") return Activation::kSilu;
  if (s == "relu") return Activation::kRelu;
  throw std::invalid_argument("unknown activation: " + s);
}

std::string to_string(Activation a) {
  return a == Activation::kSilu ? "silu" : "relu";
}

AgentParams AgentParams::init(const AgentConfig& cfg, Rng& rng) {
  if (cfg.num_classes < 2) throw std::invalid_argument("AgentConfig: need at least 2 classes");
  if (cfg.feature_dim < 1 || cfg.hidden_dim < 1) {
    throw std::invalid_argument("AgentConfig: dimensions must be positive");
  }
  const int h = cfg.hidden_dim;
  const int d = cfg.feature_dim;
  const int m = h + cfg.num_classes;  // GRU input: [embedding; previous action]

  AgentParams p;
  p.cfg = cfg;
  p.enc_w1 = random_matrix(h, d, 1.0 / std::sqrt(d), rng);
  p.enc_b1 = Tensor::zeros({h});
  p.enc_w2 = random_matrix(h, h, 1.0 / std::sqrt(h), rng);
  p.enc_b2 = Tensor::zeros({h});
  p.gru_wz = random_matrix(h, m, 1.0 / std::sqrt(m), rng);
  p.gru_uz = random_matrix(h, h, 1.0 / std::sqrt(h), rng);
  p.gru_bz = Tensor::zeros({h});
  p.gru_wr = random_matrix(h, m, 1.0 / std::sqrt(m), rng);
  p.gru_ur = random_matrix(h, h, 1.0 / std::sqrt(h), rng);
  p.gru_br = Tensor::zeros({h});
  p.gru_wn = random_matrix(h, m, 1.0 / std::sqrt(m), rng);
  p.gru_un = random_matrix(h, h, 1.0 / std::sqrt(h), rng);
  p.gru_bn = Tensor::zeros({h});
  // Small head init keeps the initial policy mean near uniform and the
  // initial values near zero.
  p.cls_w = random_matrix(cfg.num_classes, h, 0.01, rng);
  p.conc_w = random_matrix(1, h, 0.01, rng);
  p.conc_b = Tensor::zeros({1});
  p.val_w = random_matrix(1, h, 0.01, rng);
  p.val_b = Tensor::zeros({1});
  return p;
}

std::int64_t AgentParams::parameter_count() const {
  std::int64_t n = 0;
  for_each([&](const char*, const Tensor& t) { n += t.size(); });
  return n;
}

AgentVars AgentVars::bind(ad::Tape& tape, const AgentParams& params) {
  AgentVars v;
  v.cfg = params.cfg;
  v.enc_w1 = tape.leaf(params.enc_w1);
  v.enc_b1 = tape.leaf(params.enc_b1);
  v.enc_w2 = tape.leaf(params.enc_w2);
  v.enc_b2 = tape.leaf(params.enc_b2);
  v.gru_wz = tape.leaf(params.gru_wz);
  v.gru_uz = tape.leaf(params.gru_uz);
  v.gru_bz = tape.leaf(params.gru_bz);
  v.gru_wr = tape.leaf(params.gru_wr);
  v.gru_ur = tape.leaf(params.gru_ur);
  v.gru_br = tape.leaf(params.gru_br);
  v.gru_wn = tape.leaf(params.gru_wn);
  v.gru_un = tape.leaf(params.gru_un);
  v.gru_bn = tape.leaf(params.gru_bn);
  v.cls_w = tape.leaf(params.cls_w);
  v.conc_w = tape.leaf(params.conc_w);
  v.conc_b = tape.leaf(params.conc_b);
  v.val_w = tape.leaf(params.val_w);
  v.val_b = tape.leaf(params.val_b);
  return v;
}

ad::Var encode(const AgentVars& p, const Eigen::VectorXd& x) {
  ad::Tape& tape = *p.enc_w1.tape;
  if (static_cast<int>(x.size()) != p.cfg.feature_dim) {
    throw ad::ShapeError("encode", "input has " + std::to_string(x.size()) +
                                       " features, expected " +
                                       std::to_string(p.cfg.feature_dim));
  }
  Var xin = tape.constant_vector(x.array());
  Var h1 = activate(p, ad::matvec(p.enc_w1, xin) + p.enc_b1);
  return activate(p, ad::matvec(p.enc_w2, h1) + p.enc_b2);
}

ad::Var think_step(const AgentVars& p, ad::Var embedding, ad::Var tau_prev, ad::Var a_prev) {
  Var u = ad::concat(embedding, a_prev);
  Var z = ad::sigmoid(ad::matvec(p.gru_wz, u) + ad::matvec(p.gru_uz, tau_prev) + p.gru_bz);
  Var r = ad::sigmoid(ad::matvec(p.gru_wr, u) + ad::matvec(p.gru_ur, tau_prev) + p.gru_br);
  Var n = ad::tanh(ad::matvec(p.gru_wn, u) + r * ad::matvec(p.gru_un, tau_prev) + p.gru_bn);
  // tau' = (1-z).n + z.tau
  return n + z * (tau_prev - n);
}

PolicyVars policy_head(const AgentVars& p, ad::Var tau) {
  ad::Tape& tape = *tau.tape;
  PolicyVars pv;
  pv.mu = ad::softmax(ad::matvec(p.cls_w, tau));
  Var raw = ad::pick(ad::matvec(p.conc_w, tau) + p.conc_b, 0);
  // Smooth squash into [c_min, c_max]; saturates rather than hard-clips.
  pv.c = ad::scale(ad::sigmoid(raw), p.cfg.c_max - p.cfg.c_min) +
         tape.constant(p.cfg.c_min);
  pv.alpha = pv.mu * pv.c + tape.constant(p.cfg.alpha_eps);
  return pv;
}

ad::Var value_head(const AgentVars& p, ad::Var tau) {
  return ad::pick(ad::matvec(p.val_w, tau) + p.val_b, 0);
}

ad::Var dirichlet_log_prob(ad::Var alpha, const SimplexVector& action) {
  ad::Tape& tape = *alpha.tape;
  if (!action.interior()) {
    throw std::domain_error("dirichlet_log_prob: action must be strictly interior");
  }
  if (action.size() != tape.value(alpha).size()) {
    throw ad::ShapeError("dirichlet_log_prob", "action dimension mismatch");
  }
  Var log_a = tape.constant_vector(action.probs.log());
  Var ones = tape.constant_vector(Eigen::ArrayXd::Constant(action.size(), 1.0));
  return ad::log_gamma(ad::sum(alpha)) - ad::sum(ad::log_gamma(alpha)) +
         ad::sum((alpha - ones) * log_a);
}

DirichletParams extract_policy(const ad::Tape& tape, const PolicyVars& pv) {
  DirichletParams d;
  d.mu = SimplexVector(tape.value(pv.mu).data);
  d.c = tape.value(pv.c).value();
  d.alpha = tape.value(pv.alpha).data;
  return d;
}

SimplexVector sample_action(const DirichletParams& d, Rng& rng) {
  return SimplexVector(rng.dirichlet(d.alpha));
}

double dirichlet_log_pdf(const Eigen::ArrayXd& alpha, const SimplexVector& action) {
  if (!action.interior()) {
    throw std::domain_error("dirichlet_log_pdf: action must be strictly interior");
  }
  double lp = log_gamma(alpha.sum());
  for (Eigen::Index k = 0; k < alpha.size(); ++k) {
    lp -= log_gamma(alpha[k]);
    lp += (alpha[k] - 1.0) * std::log(action[static_cast<int>(k)]);
  }
  return lp;
}

SimplexVector deterministic_action(const DirichletParams& d) {
  return SimplexVector(d.alpha / d.alpha.sum());
}

void save_checkpoint(const AgentParams& params, const std::string& path_prefix,
                     const std::string& rng_state) {
  json manifest;
  manifest["format"] = "ric-checkpoint-v1";
  manifest["config"] = {
      {"feature_dim", params.cfg.feature_dim},
      {"num_classes", params.cfg.num_classes},
      {"hidden_dim", params.cfg.hidden_dim},
      {"activation", to_string(params.cfg.activation)},
      {"c_min", params.cfg.c_min},
      {"c_max", params.cfg.c_max},
      {"alpha_eps", params.cfg.alpha_eps},
  };
  manifest["rng_state"] = rng_state;

  json tensors = json::array();
  std::int64_t offset = 0;
  std::ofstream blob(path_prefix + ".bin", std::ios::binary);
  if (!blob) throw std::runtime_error("save_checkpoint: cannot open " + path_prefix + ".bin");
  params.for_each([&](const char* name, const Tensor& t) {
    tensors.push_back(
        {{"name", name}, {"shape", t.shape.to_vector()}, {"offset", offset}, {"count", t.size()}});
    blob.write(reinterpret_cast<const char*>(t.data.data()),
               static_cast<std::streamsize>(t.size() * sizeof(double)));
    offset += t.size();
  });
  manifest["tensors"] = std::move(tensors);

  std::ofstream mf(path_prefix + ".json");
  if (!mf) throw std::runtime_error("save_checkpoint: cannot open " + path_prefix + ".json");
  mf << manifest.dump(2) << "\n";
}

AgentParams load_checkpoint(const std::string& path_prefix, std::string* rng_state) {
  std::ifstream mf(path_prefix + ".json");
  if (!mf) throw std::runtime_error("load_checkpoint: cannot open " + path_prefix + ".json");
  json manifest = json::parse(mf);
  if (manifest.at("format") != "ric-checkpoint-v1") {
    throw std::runtime_error("load_checkpoint: unsupported format");
  }

  AgentParams p;
  const json& c = manifest.at("config");
  p.cfg.feature_dim = c.at("feature_dim");
  p.cfg.num_classes = c.at("num_classes");
  p.cfg.hidden_dim = c.at("hidden_dim");
  p.cfg.activation = activation_from_string(c.at("activation"));
  p.cfg.c_min = c.at("c_min");
  p.cfg.c_max = c.at("c_max");
  p.cfg.alpha_eps = c.at("alpha_eps");
  if (rng_state) *rng_state = manifest.at("rng_state");

  std::ifstream blob(path_prefix + ".bin", std::ios::binary);
  if (!blob) throw std::runtime_error("load_checkpoint: cannot open " + path_prefix + ".bin");

  const json& tensors = manifest.at("tensors");
  size_t idx = 0;
  p.for_each([&](const char* name, Tensor& t) {
    if (idx >= tensors.size()) throw std::runtime_error("load_checkpoint: manifest too short");
    const json& entry = tensors[idx++];
    if (entry.at("name") != name) {
      throw std::runtime_error("load_checkpoint: tensor order mismatch at " + std::string(name));
    }
    t.shape = ad::Shape::from_vector(entry.at("shape").get<std::vector<int>>());
    t.data.resize(t.shape.count());
    blob.read(reinterpret_cast<char*>(t.data.data()),
              static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (!blob) throw std::runtime_error("load_checkpoint: blob truncated at " + std::string(name));
  });
  return p;
}

}  // namespace ric
