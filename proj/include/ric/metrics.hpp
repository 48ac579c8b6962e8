#pragma once

#include <string>
#include <vector>

#include "ric/agent.hpp"
#include "ric/episodes.hpp"
#include "ric/simplex.hpp"
#include "ric/taskgen.hpp"

namespace ric {

struct Prediction {
  SimplexVector probs;
  int label = 0;
};

struct CalibrationBin {
  int count = 0;
  double accuracy = 0.0;
  double mean_confidence = 0.0;
};

// Binned confidence/accuracy summary. Confidence of a prediction is its max
// probability; bin index is floor(conf * M) with conf == 1.0 in the top bin.
struct CalibrationReport {
  int num_bins = 0;
  std::vector<CalibrationBin> bins;
  double ece = 0.0;
  double accuracy = 0.0;
  double mean_confidence = 0.0;
  int n = 0;
};

CalibrationReport ece(const std::vector<Prediction>& predictions, int num_bins);

// The calibration table plus raw per-bin counts (the confidence histogram
// shares the binning).
struct ReliabilityData {
  CalibrationReport report;
  std::vector<int> histogram;
};
ReliabilityData reliability_and_histogram(const std::vector<Prediction>& predictions,
                                          int num_bins);

struct AnytimePoint {
  int step = 0;
  double accuracy = 0.0;
  double mean_confidence = 0.0;
  double ece = 0.0;
};

// Deterministic refinement without halting, evaluated at every step.
std::vector<AnytimePoint> anytime_curve(const AgentParams& params,
                                        const ExampleList& dataset, int max_steps,
                                        int num_bins);

struct HaltingStats {
  int n_correct = 0, n_incorrect = 0;
  double mean_correct = 0.0, mean_incorrect = 0.0;
  double median_correct = 0.0, median_incorrect = 0.0;
  std::vector<int> histogram_correct, histogram_incorrect;  // index = step - 1
};

HaltingStats halting_stats(const std::vector<int>& halt_steps,
                           const std::vector<bool>& correct, int max_steps);

std::string calibration_report_json(const CalibrationReport& report);
void write_reliability_csv(const ReliabilityData& data, const std::string& path);
void write_anytime_csv(const std::vector<AnytimePoint>& curve, const std::string& path);
std::string halting_stats_json(const HaltingStats& stats);

}  // namespace ric
