#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ric/lab.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int epochs = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args, const std::string& default_out) {
  cmd->add_option("--config", args.config_path, "flat key = value config file");
  cmd->add_option("--out", args.out_dir, "run directory")->default_val(default_out);
  cmd->add_option("--set", args.overrides, "override, e.g. --set train.epochs=5");
  cmd->add_option("--seed", args.seed, "seed override")
      ->each([&](const std::string&) { args.seed_set = true; });
  cmd->add_option("--epochs", args.epochs, "epoch override");
}

ric::ExperimentConfig resolve_config(const CommonArgs& args) {
  ric::FlatConfig flat;
  if (!args.config_path.empty()) flat = ric::FlatConfig::parse_file(args.config_path);
  for (const std::string& kv : args.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("override must be key=value: " + kv);
    }
    flat.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (args.seed_set) flat.set("seed", std::to_string(args.seed));
  if (args.epochs >= 0) flat.set("train.epochs", std::to_string(args.epochs));
  return ric::ExperimentConfig::from_flat(flat);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale lab for reinforced iterative classification"};
  app.require_subcommand(1);

  CommonArgs gen_args, ric_args, sl_args, eval_args, anytime_args, halting_args;
  std::string eval_ckpt, anytime_ckpt, halting_ckpt;

  CLI::App* gen = app.add_subcommand("generate-data", "sample a synthetic task to CSV");
  add_common(gen, gen_args, "runs/generate-data");

  CLI::App* train_ric = app.add_subcommand("train-ric", "train the refinement agent");
  add_common(train_ric, ric_args, "runs/train-ric");

  CLI::App* train_sl =
      app.add_subcommand("train-supervised", "train the single-pass baseline");
  add_common(train_sl, sl_args, "runs/train-supervised");

  CLI::App* evaluate = app.add_subcommand("evaluate", "evaluate a checkpoint on the test split");
  add_common(evaluate, eval_args, "runs/evaluate");
  evaluate->add_option("--checkpoint", eval_ckpt, "checkpoint path prefix")->required();

  CLI::App* anytime = app.add_subcommand("anytime", "per-step accuracy/confidence curve");
  add_common(anytime, anytime_args, "runs/anytime");
  anytime->add_option("--checkpoint", anytime_ckpt, "checkpoint path prefix")->required();

  CLI::App* halting = app.add_subcommand("halting", "value-based stopping statistics");
  add_common(halting, halting_args, "runs/halting");
  halting->add_option("--checkpoint", halting_ckpt, "checkpoint path prefix")->required();

  std::uint64_t verify_seed = 0;
  int verify_samples = 100000;
  std::string verify_out;
  CLI::App* verify = app.add_subcommand("verify-theory", "run the analytic verifier battery");
  verify->add_option("--seed", verify_seed, "seed");
  verify->add_option("--samples", verify_samples, "Monte-Carlo samples per claim");
  verify->add_option("--out", verify_out, "optional output directory");

  std::string run_a, run_b;
  CLI::App* compare = app.add_subcommand("compare", "final metrics of two runs side by side");
  compare->add_option("run_a", run_a, "first run directory")->required();
  compare->add_option("run_b", run_b, "second run directory")->required();

  std::string suite_scale = "smoke";
  std::uint64_t suite_seed = 0;
  std::string suite_out = "runs/paper-suite";
  CLI::App* suite = app.add_subcommand("paper-suite", "experiment bundle (smoke|full-desk)");
  suite->add_option("--scale", suite_scale, "smoke or full-desk");
  suite->add_option("--seed", suite_seed, "seed");
  suite->add_option("--out", suite_out, "report directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 1;
  }

  try {
    if (*gen) return ric::cmd_generate_data(resolve_config(gen_args), gen_args.out_dir);
    if (*train_ric) return ric::cmd_train_ric(resolve_config(ric_args), ric_args.out_dir);
    if (*train_sl)
      return ric::cmd_train_supervised(resolve_config(sl_args), sl_args.out_dir);
    if (*evaluate)
      return ric::cmd_evaluate(resolve_config(eval_args), eval_ckpt, eval_args.out_dir);
    if (*anytime)
      return ric::cmd_anytime(resolve_config(anytime_args), anytime_ckpt, anytime_args.out_dir);
    if (*halting)
      return ric::cmd_halting(resolve_config(halting_args), halting_ckpt, halting_args.out_dir);
    if (*verify) return ric::cmd_verify_theory(verify_seed, verify_samples, verify_out);
    if (*compare) return ric::cmd_compare(run_a, run_b);
    if (*suite)
      return ric::cmd_paper_suite(ric::suite_scale_from_string(suite_scale), suite_seed,
                                  suite_out);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
