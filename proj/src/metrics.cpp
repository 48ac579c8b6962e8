#include "ric/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace ric {

namespace {

int bin_index(double confidence, int num_bins) {
  int idx = static_cast<int>(confidence * num_bins);
  return std::min(idx, num_bins - 1);
}

double median_of(std::vector<int> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

CalibrationReport ece(const std::vector<Prediction>& predictions, int num_bins) {
  if (predictions.empty()) throw std::invalid_argument("ece: empty prediction list");
  if (num_bins < 1) throw std::invalid_argument("ece: need at least one bin");

  CalibrationReport report;
  report.num_bins = num_bins;
  report.n = static_cast<int>(predictions.size());
  report.bins.assign(num_bins, CalibrationBin{});

  // Confidences are summed in sorted order per bin, so the report is
  // bit-identical under any permutation of the prediction list.
  std::vector<std::vector<double>> bin_confs(num_bins);
  std::vector<int> correct_sum(num_bins, 0);
  int total_correct = 0;
  for (const auto& p : predictions) {
    const double conf = p.probs.confidence();
    const bool correct = p.probs.argmax() == p.label;
    const int b = bin_index(conf, num_bins);
    report.bins[b].count += 1;
    bin_confs[b].push_back(conf);
    correct_sum[b] += correct ? 1 : 0;
    total_correct += correct ? 1 : 0;
  }
  std::vector<double> conf_sum(num_bins, 0.0);
  for (int b = 0; b < num_bins; ++b) {
    std::sort(bin_confs[b].begin(), bin_confs[b].end());
    for (double c : bin_confs[b]) conf_sum[b] += c;
    report.mean_confidence += conf_sum[b];
  }
  report.mean_confidence /= report.n;
  report.accuracy = static_cast<double>(total_correct) / report.n;

  for (int b = 0; b < num_bins; ++b) {
    auto& bin = report.bins[b];
    if (bin.count == 0) continue;  // empty bins contribute nothing
    bin.accuracy = static_cast<double>(correct_sum[b]) / bin.count;
    bin.mean_confidence = conf_sum[b] / bin.count;
    report.ece += (static_cast<double>(bin.count) / report.n) *
                  std::abs(bin.accuracy - bin.mean_confidence);
  }
  return report;
}

ReliabilityData reliability_and_histogram(const std::vector<Prediction>& predictions,
                                          int num_bins) {
  ReliabilityData data;
  data.report = ece(predictions, num_bins);
  data.histogram.resize(num_bins);
  for (int b = 0; b < num_bins; ++b) data.histogram[b] = data.report.bins[b].count;
  return data;
}

std::vector<AnytimePoint> anytime_curve(const AgentParams& params,
                                        const ExampleList& dataset, int max_steps,
                                        int num_bins) {
  if (dataset.empty()) throw std::invalid_argument("anytime_curve: empty dataset");
  std::vector<std::vector<Prediction>> per_step(max_steps);
  for (auto& v : per_step) v.reserve(dataset.size());

  ad::Tape tape;
  for (const auto& ex : dataset) {
    tape.clear();
    AgentVars vars = AgentVars::bind(tape, params);
    RefinementTrace trace = deterministic_refine(vars, ex.features, max_steps);
    for (int t = 0; t < max_steps; ++t) {
      per_step[t].push_back(Prediction{trace.mean_actions[t], ex.label});
    }
  }

  std::vector<AnytimePoint> curve(max_steps);
  for (int t = 0; t < max_steps; ++t) {
    const CalibrationReport report = ece(per_step[t], num_bins);
    curve[t] = AnytimePoint{t + 1, report.accuracy, report.mean_confidence, report.ece};
  }
  return curve;
}

HaltingStats halting_stats(const std::vector<int>& halt_steps,
                           const std::vector<bool>& correct, int max_steps) {
  if (halt_steps.size() != correct.size()) {
    throw std::invalid_argument("halting_stats: size mismatch");
  }
  HaltingStats stats;
  stats.histogram_correct.assign(max_steps, 0);
  stats.histogram_incorrect.assign(max_steps, 0);
  std::vector<int> steps_correct, steps_incorrect;
  for (size_t i = 0; i < halt_steps.size(); ++i) {
    const int step = halt_steps[i];
    if (step < 1 || step > max_steps) {
      throw std::invalid_argument("halting_stats: halt step out of range");
    }
    if (correct[i]) {
      stats.histogram_correct[step - 1] += 1;
      steps_correct.push_back(step);
      stats.mean_correct += step;
    } else {
      stats.histogram_incorrect[step - 1] += 1;
      steps_incorrect.push_back(step);
      stats.mean_incorrect += step;
    }
  }
  stats.n_correct = static_cast<int>(steps_correct.size());
  stats.n_incorrect = static_cast<int>(steps_incorrect.size());
  if (stats.n_correct > 0) stats.mean_correct /= stats.n_correct;
  if (stats.n_incorrect > 0) stats.mean_incorrect /= stats.n_incorrect;
  stats.median_correct = median_of(std::move(steps_correct));
  stats.median_incorrect = median_of(std::move(steps_incorrect));
  return stats;
}

std::string calibration_report_json(const CalibrationReport& report) {
  nlohmann::json j;
  j["num_bins"] = report.num_bins;
  j["n"] = report.n;
  j["ece"] = report.ece;
  j["accuracy"] = report.accuracy;
  j["mean_confidence"] = report.mean_confidence;
  nlohmann::json bins = nlohmann::json::array();
  for (const auto& b : report.bins) {
    bins.push_back({{"count", b.count},
                    {"accuracy", b.accuracy},
                    {"mean_confidence", b.mean_confidence}});
  }
  j["bins"] = std::move(bins);
  return j.dump(2);
}

void write_reliability_csv(const ReliabilityData& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_reliability_csv: cannot open " + path);
  out << "# ric-reliability-v1\n";
  out << "bin,count,accuracy,mean_confidence\n";
  char buf[64];
  for (int b = 0; b < data.report.num_bins; ++b) {
    const auto& bin = data.report.bins[b];
    std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g\n", b, bin.count, bin.accuracy,
                  bin.mean_confidence);
    out << buf;
  }
}

void write_anytime_csv(const std::vector<AnytimePoint>& curve, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_anytime_csv: cannot open " + path);
  out << "# ric-anytime-v1\n";
  out << "step,accuracy,mean_confidence,ece\n";
  char buf[96];
  for (const auto& p : curve) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", p.step, p.accuracy,
                  p.mean_confidence, p.ece);
    out << buf;
  }
}

std::string halting_stats_json(const HaltingStats& stats) {
  nlohmann::json j;
  j["n_correct"] = stats.n_correct;
  j["n_incorrect"] = stats.n_incorrect;
  j["mean_correct"] = stats.mean_correct;
  j["mean_incorrect"] = stats.mean_incorrect;
  j["median_correct"] = stats.median_correct;
  j["median_incorrect"] = stats.median_incorrect;
  j["histogram_correct"] = stats.histogram_correct;
  j["histogram_incorrect"] = stats.histogram_incorrect;
  return j.dump(2);
}

}  // namespace ric
