#include "ric/lab.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "ric/metrics.hpp"
#include "ric/theory.hpp"

namespace ric {

namespace fs = std::filesystem;
using json = nlohmann::json;

const char* const kLabVersion = "ric-lab 0.1.0";

namespace {

void ensure_dir(const std::string& dir) {
  fs::create_directories(dir);
}

void require_disk_space(const std::string& dir, std::uintmax_t min_bytes) {
  std::error_code ec;
  const fs::space_info info = fs::space(dir, ec);
  if (!ec && info.available < min_bytes) {
    throw std::runtime_error("insufficient disk space in " + dir);
  }
}

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::vector<Prediction> final_ric_predictions(const AgentParams& params,
                                              const ExampleList& split, int horizon) {
  std::vector<Prediction> out;
  out.reserve(split.size());
  ad::Tape tape;
  for (const auto& ex : split) {
    tape.clear();
    AgentVars vars = AgentVars::bind(tape, params);
    RefinementTrace trace = deterministic_refine(vars, ex.features, horizon);
    out.push_back(Prediction{trace.mean_actions.back(), ex.label});
  }
  return out;
}

std::vector<Prediction> supervised_predictions(const SupervisedParams& params,
                                               const ExampleList& split) {
  std::vector<Prediction> out;
  out.reserve(split.size());
  for (const auto& ex : split) {
    out.push_back(Prediction{supervised_predict(params, ex.features), ex.label});
  }
  return out;
}

MetricRow final_row(const std::vector<MetricRow>& log, const std::string& split) {
  for (auto it = log.rbegin(); it != log.rend(); ++it) {
    if (it->split == split) return *it;
  }
  throw std::runtime_error("no metric rows for split " + split);
}

}  // namespace

std::uint64_t content_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_run_manifest(const std::string& dir, const ExperimentConfig& cfg,
                        const std::vector<std::string>& outputs) {
  const std::string config_text = cfg.to_flat().serialize();
  json j;
  j["format"] = "ric-manifest-v1";
  j["version"] = kLabVersion;
  j["config"] = config_text;
  char hash[24];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(
                    content_hash(config_text + kLabVersion)));
  j["content_hash"] = hash;
  j["seed"] = cfg.train.seed;
  j["outputs"] = outputs;
  j["timestamp"] = timestamp_utc();

  std::ofstream out(dir + "/manifest.json");
  if (!out) throw std::runtime_error("cannot write manifest in " + dir);
  out << j.dump(2) << "\n";

  std::ofstream cf(dir + "/config.cfg");
  cf << config_text;
}

int cmd_generate_data(const ExperimentConfig& cfg, const std::string& out_dir) {
  ensure_dir(out_dir);
  Dataset ds = generate(cfg.task);
  save_csv(ds.train, out_dir + "/train.csv");
  save_csv(ds.val, out_dir + "/val.csv");
  save_csv(ds.test, out_dir + "/test.csv");
  save_sidecar_json(ds, ds.train, out_dir + "/train.meta.json");
  save_sidecar_json(ds, ds.val, out_dir + "/val.meta.json");
  save_sidecar_json(ds, ds.test, out_dir + "/test.meta.json");
  write_run_manifest(out_dir, cfg,
                     {"train.csv", "val.csv", "test.csv", "train.meta.json",
                      "val.meta.json", "test.meta.json"});
  std::cout << "wrote " << ds.train.size() << "/" << ds.val.size() << "/"
            << ds.test.size() << " examples to " << out_dir << "\n";
  return 0;
}

int cmd_train_ric(const ExperimentConfig& cfg, const std::string& out_dir) {
  ensure_dir(out_dir);
  require_disk_space(out_dir, 16ull << 20);
  Dataset ds = generate(cfg.task);
  RicTrainResult result = train_ric(ds, cfg.agent, cfg.train);
  write_metrics_csv(result.log, out_dir + "/metrics.csv");
  write_diagnostics_csv(result.log, out_dir + "/diagnostics.csv");
  save_checkpoint(result.params, out_dir + "/checkpoint");
  write_run_manifest(out_dir, cfg,
                     {"metrics.csv", "diagnostics.csv", "checkpoint.json", "checkpoint.bin"});
  if (!result.log.empty()) {
    const MetricRow last = final_row(result.log, ds.val.empty() ? "train" : "val");
    std::cout << "final accuracy " << last.accuracy << ", ece " << last.ece << "\n";
  }
  return 0;
}

int cmd_train_supervised(const ExperimentConfig& cfg, const std::string& out_dir) {
  ensure_dir(out_dir);
  require_disk_space(out_dir, 16ull << 20);
  Dataset ds = generate(cfg.task);
  SupervisedTrainResult result = train_supervised(ds, cfg.agent, cfg.train);
  write_metrics_csv(result.log, out_dir + "/metrics.csv");
  write_diagnostics_csv(result.log, out_dir + "/diagnostics.csv");
  write_run_manifest(out_dir, cfg, {"metrics.csv", "diagnostics.csv"});
  if (!result.log.empty()) {
    const MetricRow last = final_row(result.log, ds.val.empty() ? "train" : "val");
    std::cout << "final accuracy " << last.accuracy << ", ece " << last.ece << "\n";
  }
  return 0;
}

int cmd_evaluate(const ExperimentConfig& cfg, const std::string& checkpoint_prefix,
                 const std::string& out_dir) {
  ensure_dir(out_dir);
  AgentParams params = load_checkpoint(checkpoint_prefix);
  Dataset ds = generate(cfg.task);
  TrainConfig eval_cfg = cfg.train;
  eval_cfg.eval_max_examples = 0;  // full split
  MetricRow row = evaluate_ric(params, ds.test, eval_cfg, 0, "test");
  write_metrics_csv({row}, out_dir + "/metrics.csv");
  write_run_manifest(out_dir, cfg, {"metrics.csv"});
  std::cout << "test accuracy " << row.accuracy << ", ece " << row.ece
            << ", mean confidence " << row.mean_confidence << "\n";
  return 0;
}

int cmd_anytime(const ExperimentConfig& cfg, const std::string& checkpoint_prefix,
                const std::string& out_dir) {
  ensure_dir(out_dir);
  AgentParams params = load_checkpoint(checkpoint_prefix);
  Dataset ds = generate(cfg.task);
  const auto curve =
      anytime_curve(params, ds.test, cfg.train.horizon, cfg.train.metric_bins);
  write_anytime_csv(curve, out_dir + "/anytime.csv");
  write_run_manifest(out_dir, cfg, {"anytime.csv"});
  std::cout << "accuracy at step 1: " << curve.front().accuracy << ", at step "
            << curve.size() << ": " << curve.back().accuracy << "\n";
  return 0;
}

int cmd_halting(const ExperimentConfig& cfg, const std::string& checkpoint_prefix,
                const std::string& out_dir) {
  ensure_dir(out_dir);
  AgentParams params = load_checkpoint(checkpoint_prefix);
  Dataset ds = generate(cfg.task);
  HaltOptions opt{cfg.train.horizon, cfg.train.halting_guard_first_step};

  std::vector<int> steps;
  std::vector<bool> correct;
  ad::Tape tape;
  for (const auto& ex : ds.test) {
    tape.clear();
    AgentVars vars = AgentVars::bind(tape, params);
    RefinementTrace trace = deterministic_refine(vars, ex.features, opt.max_steps);
    HaltingRecord rec = halting_from_trace(trace, params.cfg.num_classes, opt);
    steps.push_back(rec.halt_step);
    correct.push_back(rec.prediction.argmax() == ex.label);
  }
  const HaltingStats stats = halting_stats(steps, correct, opt.max_steps);
  std::ofstream out(out_dir + "/halting.json");
  out << halting_stats_json(stats) << "\n";
  write_run_manifest(out_dir, cfg, {"halting.json"});
  std::cout << "mean halt step: correct " << stats.mean_correct << ", incorrect "
            << stats.mean_incorrect << "\n";
  return 0;
}

int cmd_verify_theory(std::uint64_t seed, int samples, const std::string& out_dir) {
  const auto outcomes = run_theory_suite(seed, samples);
  bool all_pass = true;
  std::string lines;
  for (const auto& o : outcomes) {
    const std::string line = verification_outcome_json(o);
    std::cout << line << "\n";
    lines += line + "\n";
    all_pass = all_pass && o.pass;
  }
  if (!out_dir.empty()) {
    ensure_dir(out_dir);
    std::ofstream out(out_dir + "/theory.jsonl");
    out << lines;
  }
  return all_pass ? 0 : 2;
}

int cmd_compare(const std::string& run_a, const std::string& run_b) {
  const auto log_a = read_metrics_csv(run_a + "/metrics.csv");
  const auto log_b = read_metrics_csv(run_b + "/metrics.csv");
  const std::string split_a = log_a.back().split;
  const std::string split_b = log_b.back().split;
  const MetricRow a = final_row(log_a, split_a);
  const MetricRow b = final_row(log_b, split_b);
  std::printf("%-18s %14s %14s\n", "metric", run_a.c_str(), run_b.c_str());
  std::printf("%-18s %14.6f %14.6f\n", "accuracy", a.accuracy, b.accuracy);
  std::printf("%-18s %14.6f %14.6f\n", "ece", a.ece, b.ece);
  std::printf("%-18s %14.6f %14.6f\n", "mean_confidence", a.mean_confidence,
              b.mean_confidence);
  std::printf("%-18s %14.6f %14.6f\n", "return_norm", a.return_norm, b.return_norm);
  return 0;
}

SuiteScale suite_scale_from_string(const std::string& s) {
  if (s == "smoke") return SuiteScale::kSmoke;
  if (s == "full-desk") return SuiteScale::kFullDesk;
  throw std::invalid_argument("unknown suite scale: " + s);
}

int cmd_paper_suite(SuiteScale scale, std::uint64_t seed, const std::string& out_dir) {
  ensure_dir(out_dir);
  require_disk_space(out_dir, 64ull << 20);
  const bool smoke = scale == SuiteScale::kSmoke;

  ExperimentConfig base;
  base.task.kind = TaskKind::kGaussianMixture;
  base.task.num_classes = smoke ? 3 : 10;
  base.task.feature_dim = smoke ? 2 : 8;
  base.task.overlap = smoke ? 0.9 : 1.1;
  base.task.num_train = smoke ? 400 : 2000;
  base.task.num_val = smoke ? 200 : 500;
  base.task.num_test = smoke ? 400 : 2000;
  base.task.seed = seed;
  base.agent.feature_dim = base.task.feature_dim;
  base.agent.num_classes = base.task.num_classes;
  base.agent.hidden_dim = smoke ? 24 : 32;
  base.train.seed = seed;
  base.train.horizon = smoke ? 8 : 20;
  base.train.epochs = smoke ? 6 : 150;
  base.train.batch_size = 128;
  base.train.eval_max_examples = smoke ? 200 : 1000;

  ExperimentConfig sl = base;
  sl.train.epochs = smoke ? 8 : 60;

  json summary;
  summary["scale"] = smoke ? "smoke" : "full-desk";
  summary["seed"] = seed;

  // (a) training dynamics, clean task.
  Dataset clean = generate(base.task);
  RicTrainResult ric = train_ric(clean, base.agent, base.train);
  SupervisedTrainResult sup = train_supervised(clean, sl.agent, sl.train);
  write_metrics_csv(ric.log, out_dir + "/dynamics_ric.csv");
  write_metrics_csv(sup.log, out_dir + "/dynamics_sl.csv");
  save_checkpoint(ric.params, out_dir + "/checkpoint_ric");

  // (b) the same under label noise.
  const double rates[] = {0.0, 0.0903, 0.4021};
  json noise_summary = json::array();
  for (double rate : rates) {
    ExperimentConfig noisy = base;
    noisy.task.noise_rate = rate;
    ExperimentConfig noisy_sl = sl;
    noisy_sl.task.noise_rate = rate;
    Dataset ds = generate(noisy.task);

    RicTrainResult nric = train_ric(ds, noisy.agent, noisy.train);
    SupervisedTrainResult nsup = train_supervised(ds, noisy_sl.agent, noisy_sl.train);
    char tag[16];
    std::snprintf(tag, sizeof(tag), "%.4f", rate);
    write_metrics_csv(nric.log, out_dir + "/noise_" + tag + "_ric.csv");
    write_metrics_csv(nsup.log, out_dir + "/noise_" + tag + "_sl.csv");

    TrainConfig eval_cfg = noisy.train;
    eval_cfg.eval_max_examples = 0;
    const MetricRow r = evaluate_ric(nric.params, ds.test, eval_cfg, 0, "test");
    const MetricRow s = evaluate_supervised(nsup.params, ds.test, eval_cfg, 0, "test");
    noise_summary.push_back({
        {"noise_rate", rate},
        {"ric_accuracy", r.accuracy},
        {"sl_accuracy", s.accuracy},
        {"ric_ece", r.ece},
        {"sl_ece", s.ece},
        {"ece_gap_sign", s.ece - r.ece > 0 ? 1 : (s.ece - r.ece < 0 ? -1 : 0)},
    });
  }
  summary["noise_study"] = std::move(noise_summary);

  // (c) confidence histogram and reliability data on the clean test split.
  {
    const auto rp = final_ric_predictions(ric.params, clean.test, base.train.horizon);
    const auto sp = supervised_predictions(sup.params, clean.test);
    write_reliability_csv(reliability_and_histogram(rp, base.train.metric_bins),
                          out_dir + "/reliability_ric.csv");
    write_reliability_csv(reliability_and_histogram(sp, base.train.metric_bins),
                          out_dir + "/reliability_sl.csv");
  }

  // (d) anytime curve and halting distributions for the clean-task model.
  {
    const auto curve = anytime_curve(ric.params, clean.test, base.train.horizon,
                                     base.train.metric_bins);
    write_anytime_csv(curve, out_dir + "/anytime.csv");

    HaltOptions opt{base.train.horizon, base.train.halting_guard_first_step};
    std::vector<int> steps;
    std::vector<bool> correct;
    for (const auto& ex : clean.test) {
      HaltingRecord rec = infer_with_halting(ric.params, ex.features, opt);
      steps.push_back(rec.halt_step);
      correct.push_back(rec.prediction.argmax() == ex.label);
    }
    std::ofstream out(out_dir + "/halting.json");
    out << halting_stats_json(halting_stats(steps, correct, opt.max_steps)) << "\n";
  }

  std::ofstream out(out_dir + "/summary.json");
  out << summary.dump(2) << "\n";
  write_run_manifest(out_dir, base,
                     {"dynamics_ric.csv", "dynamics_sl.csv", "reliability_ric.csv",
                      "reliability_sl.csv", "anytime.csv", "halting.json", "summary.json"});
  std::cout << "paper suite written to " << out_dir << "\n";
  return 0;
}

}  // namespace ric
