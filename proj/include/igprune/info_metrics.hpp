#pragma once

// Information measurements over a pruning trajectory.
//
// The task-relevant information of a graph is estimated by a trained
// predictor: Î = Ĥ(Y) − mean NLL, evaluated on held-out (test) nodes. This is
// a lower bound on I(G; Y) whose gap is the predictor's expected KL error, so
// it need not decrease monotonically along a trajectory even though the true
// quantity does. Natural logarithms throughout.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "igprune/gcn.hpp"
#include "igprune/graph.hpp"

namespace igprune {

struct Trajectory;

double empirical_entropy(std::span<const int> labels);

inline double mi_lower_bound(double entropy, double mean_nll) { return entropy - mean_nll; }

double complexity_score(std::size_t edges_k, std::size_t edges_0);

// (mi_k − mi_K) / (mi_0 − mi_K). Throws DegenerateError when
// |mi_0 − mi_K| <= eps.
double info_score(double mi_k, double mi_0, double mi_K, double eps = 1e-9);

struct CurvePoint {
  double complexity;
  double info;
};

// Trapezoid area under info(complexity) over [0, 1]. Points must run from
// complexity 1 down to 0, strictly decreasing.
double auc_ic(std::span<const CurvePoint> curve);

// Smallest recorded complexity whose info score reaches delta.
double ibp(std::span<const CurvePoint> curve, double delta);

struct StepMetrics {
  std::size_t step = 0;
  std::size_t edges_remaining = 0;
  double complexity = 0.0;
  double mi_mean = 0.0;
  double mi_std = 0.0;
  double info_score = 0.0;
  double accuracy_mean = 0.0;
  std::size_t components = 0;
};

struct SummaryMetrics {
  double auc_ic = 0.0;
  double ibp = 1.0;
  double delta = 0.8;
  // Spread of the per-repetition curves, each normalized with the mean
  // curve's endpoints.
  double auc_ic_std = 0.0;
  double ibp_std = 0.0;
  std::vector<StepMetrics> steps;
};

struct EvalConfig {
  TrainConfig train;
  std::size_t repetitions = 5;
  double delta = 0.8;
  unsigned threads = 0;
};

// Trains `repetitions` fresh predictors per step (seeds train.seed + r),
// measures hold-out MI, normalizes by the mean curve and summarizes.
SummaryMetrics evaluate_trajectory(const Trajectory& traj, const Task& task,
                                   const EvalConfig& cfg);

// metrics.csv: step,edges,complexity,mi_mean,mi_std,info_score,acc_mean
void write_metrics_csv(const SummaryMetrics& s, const std::filesystem::path& path);

nlohmann::json summary_json(const SummaryMetrics& s, const std::string& method,
                            std::uint64_t seed, const nlohmann::json& config);

}  // namespace igprune
