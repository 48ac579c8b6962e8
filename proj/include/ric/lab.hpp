#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ric/config.hpp"

namespace ric {

extern const char* const kLabVersion;

// FNV-1a over bytes; identifies the config content in manifests.
std::uint64_t content_hash(const std::string& text);

// Every run directory is self-describing: resolved config, manifest, and the
// outputs listed in it. Re-running the same config and seed reproduces every
// CSV byte-for-byte.
void write_run_manifest(const std::string& dir, const ExperimentConfig& cfg,
                        const std::vector<std::string>& outputs);

int cmd_generate_data(const ExperimentConfig& cfg, const std::string& out_dir);
int cmd_train_ric(const ExperimentConfig& cfg, const std::string& out_dir);
int cmd_train_supervised(const ExperimentConfig& cfg, const std::string& out_dir);
int cmd_evaluate(const ExperimentConfig& cfg, const std::string& checkpoint_prefix,
                 const std::string& out_dir);
int cmd_anytime(const ExperimentConfig& cfg, const std::string& checkpoint_prefix,
                const std::string& out_dir);
int cmd_halting(const ExperimentConfig& cfg, const std::string& checkpoint_prefix,
                const std::string& out_dir);
int cmd_verify_theory(std::uint64_t seed, int samples, const std::string& out_dir);
int cmd_compare(const std::string& run_a, const std::string& run_b);

enum class SuiteScale { kSmoke, kFullDesk };
SuiteScale suite_scale_from_string(const std::string& s);

// Experiment bundle: training-dynamics comparison on a clean task, the same
// under label noise {0, 0.0903, 0.4021}, confidence/reliability data, and
// anytime/halting analyses. Emits raw CSVs plus summary.json.
int cmd_paper_suite(SuiteScale scale, std::uint64_t seed, const std::string& out_dir);

}  // namespace ric
