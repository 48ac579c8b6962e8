#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "ric/agent.hpp"
#include "ric/taskgen.hpp"
#include "ric/trainer.hpp"

namespace ric {

// Flat `key = value` configuration, one assignment per line, `#` comments.
// Round-trips deterministically for manifests.
class FlatConfig {
 public:
  FlatConfig() = default;
  static FlatConfig parse_file(const std::string& path);
  static FlatConfig parse_string(const std::string& text);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_uint64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  // Keys are emitted sorted; `serialize` output reparses to an equal config.
  std::string serialize() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

// Experiment configuration: task + agent + training, all overridable from
// one flat file.
struct ExperimentConfig {
  TaskSpec task;
  AgentConfig agent;
  TrainConfig train;

  static ExperimentConfig from_flat(const FlatConfig& flat);
  FlatConfig to_flat() const;
};

}  // namespace ric
