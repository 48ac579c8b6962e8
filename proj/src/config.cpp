#include "ric/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ric {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// The known key set; unknown keys in a config file are validation errors.
const char* const kKnownKeys[] = {
    "seed",
    "task.kind", "task.classes", "task.features", "task.overlap", "task.noise_rate",
    "task.train", "task.val", "task.test", "task.seed",
    "agent.hidden", "agent.activation",
    "train.gamma", "train.gae_lambda", "train.horizon", "train.passes",
    "train.value_coef", "train.clip_ratio", "train.optimizer", "train.learning_rate",
    "train.sgd_momentum", "train.weight_decay", "train.grad_clip", "train.batch_size",
    "train.epochs", "train.advantage_norm", "train.divergence_bound",
    "train.metric_bins", "train.eval_examples", "train.halting_guard_first_step",
};

}  // namespace

FlatConfig FlatConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

FlatConfig FlatConfig::parse_string(const std::string& text) {
  FlatConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw std::runtime_error("config line " + std::to_string(lineno) + ": empty key");
    }
    cfg.values_[key] = value;
  }
  return cfg;
}

std::string FlatConfig::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double FlatConfig::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos == it->second.size()) return v;
  } catch (const std::exception&) {
  }
  throw std::runtime_error("config: bad number for " + key);
}

int FlatConfig::get_int(const std::string& key, int fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    size_t pos = 0;
    const int v = std::stoi(it->second, &pos);
    if (pos == it->second.size()) return v;
  } catch (const std::exception&) {
  }
  throw std::runtime_error("config: bad integer for " + key);
}

std::uint64_t FlatConfig::get_uint64(const std::string& key, std::uint64_t fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    size_t pos = 0;
    const std::uint64_t v = std::stoull(it->second, &pos);
    if (pos == it->second.size()) return v;
  } catch (const std::exception&) {
  }
  throw std::runtime_error("config: bad integer for " + key);
}

bool FlatConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw std::runtime_error("config: bad boolean for " + key);
}

std::string FlatConfig::serialize() const {
  std::string out;
  for (const auto& [key, value] : values_) {
    out += key;
    out += " = ";
    out += value;
    out += "\n";
  }
  return out;
}

ExperimentConfig ExperimentConfig::from_flat(const FlatConfig& flat) {
  for (const auto& [key, _] : flat.values()) {
    bool known = false;
    for (const char* k : kKnownKeys) {
      if (key == k) {
        known = true;
        break;
      }
    }
    if (!known) throw std::runtime_error("config: unknown key '" + key + "'");
  }

  ExperimentConfig cfg;
  const std::uint64_t seed = flat.get_uint64("seed", 0);

  cfg.task.kind = task_kind_from_string(flat.get_string("task.kind", "gaussian-mixture"));
  cfg.task.num_classes = flat.get_int("task.classes", 2);
  cfg.task.feature_dim = flat.get_int("task.features", 2);
  cfg.task.overlap = flat.get_double("task.overlap", 1.0);
  cfg.task.noise_rate = flat.get_double("task.noise_rate", 0.0);
  cfg.task.num_train = flat.get_int("task.train", 1000);
  cfg.task.num_val = flat.get_int("task.val", 200);
  cfg.task.num_test = flat.get_int("task.test", 500);
  cfg.task.seed = flat.get_uint64("task.seed", seed);

  cfg.agent.feature_dim = cfg.task.feature_dim;
  cfg.agent.num_classes = cfg.task.num_classes;
  cfg.agent.hidden_dim = flat.get_int("agent.hidden", 64);
  cfg.agent.activation = activation_from_string(flat.get_string("agent.activation", "silu"));

  cfg.train.gamma = flat.get_double("train.gamma", 0.8);
  cfg.train.gae_lambda = flat.get_double("train.gae_lambda", 0.95);
  cfg.train.horizon = flat.get_int("train.horizon", 20);
  cfg.train.passes_per_snapshot = flat.get_int("train.passes", 5);
  cfg.train.value_coef = flat.get_double("train.value_coef", 0.5);
  cfg.train.clip_ratio = flat.get_double("train.clip_ratio", 0.2);
  cfg.train.optimizer = optimizer_from_string(flat.get_string("train.optimizer", "adam"));
  cfg.train.learning_rate = flat.get_double("train.learning_rate", 3e-4);
  cfg.train.sgd_momentum = flat.get_double("train.sgd_momentum", 0.9);
  cfg.train.weight_decay = flat.get_double("train.weight_decay", 0.001);
  cfg.train.grad_clip_norm = flat.get_double("train.grad_clip", 0.5);
  cfg.train.batch_size = flat.get_int("train.batch_size", 128);
  cfg.train.epochs = flat.get_int("train.epochs", 100);
  cfg.train.seed = seed;
  cfg.train.advantage_norm = flat.get_bool("train.advantage_norm", true);
  cfg.train.divergence_bound = flat.get_double("train.divergence_bound", 1e4);
  cfg.train.metric_bins = flat.get_int("train.metric_bins", 15);
  cfg.train.eval_max_examples = flat.get_int("train.eval_examples", 1000);
  cfg.train.halting_guard_first_step =
      flat.get_bool("train.halting_guard_first_step", true);

  cfg.task.validate();
  cfg.train.validate();
  return cfg;
}

FlatConfig ExperimentConfig::to_flat() const {
  FlatConfig flat;
  flat.set("seed", std::to_string(train.seed));
  flat.set("task.kind", to_string(task.kind));
  flat.set("task.classes", std::to_string(task.num_classes));
  flat.set("task.features", std::to_string(task.feature_dim));
  flat.set("task.overlap", format_double(task.overlap));
  flat.set("task.noise_rate", format_double(task.noise_rate));
  flat.set("task.train", std::to_string(task.num_train));
  flat.set("task.val", std::to_string(task.num_val));
  flat.set("task.test", std::to_string(task.num_test));
  flat.set("task.seed", std::to_string(task.seed));
  flat.set("agent.hidden", std::to_string(agent.hidden_dim));
  flat.set("agent.activation", to_string(agent.activation));
  flat.set("train.gamma", format_double(train.gamma));
  flat.set("train.gae_lambda", format_double(train.gae_lambda));
  flat.set("train.horizon", std::to_string(train.horizon));
  flat.set("train.passes", std::to_string(train.passes_per_snapshot));
  flat.set("train.value_coef", format_double(train.value_coef));
  flat.set("train.clip_ratio", format_double(train.clip_ratio));
  flat.set("train.optimizer", to_string(train.optimizer));
  flat.set("train.learning_rate", format_double(train.learning_rate));
  flat.set("train.sgd_momentum", format_double(train.sgd_momentum));
  flat.set("train.weight_decay", format_double(train.weight_decay));
  flat.set("train.grad_clip", format_double(train.grad_clip_norm));
  flat.set("train.batch_size", std::to_string(train.batch_size));
  flat.set("train.epochs", std::to_string(train.epochs));
  flat.set("train.advantage_norm", train.advantage_norm ? "true" : "false");
  flat.set("train.divergence_bound", format_double(train.divergence_bound));
  flat.set("train.metric_bins", std::to_string(train.metric_bins));
  flat.set("train.eval_examples", std::to_string(train.eval_max_examples));
  flat.set("train.halting_guard_first_step",
           train.halting_guard_first_step ? "true" : "false");
  return flat;
}

}  // namespace ric
