#pragma once

// K-step information-guided pruning.
//
// Each step trains a fresh predictor on the current edge set, scores every
// active edge by how much the validation loss changes when that edge is
// taken away, and removes the lowest-scoring batch. The view borrowed from
// gradient boosting is that an edge is a weak contributor whose "residual" is
// its effect on the current model's loss; nothing here fits learners or uses
// a shrinkage rate, the analogy only motivates the scores.
//
// Scoring modes:
//   exact     S(e) = L_val(E \ {e}; θ) − L_val(E; θ), θ fixed, one masked
//             forward pass per edge.
//   gradient  S(e) = −w_e · ∂L_val/∂w_e, the first-order estimate of the
//             same quantity.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "igprune/baselines.hpp"
#include "igprune/gcn.hpp"
#include "igprune/graph.hpp"

namespace igprune {

enum class ScoringMode { exact, gradient };

struct PruneConfig {
  std::size_t steps = 10;
  ScoringMode mode = ScoringMode::exact;
  TrainConfig train;
  std::uint64_t seed = 42;
  unsigned threads = 0;
  // Called after each completed step with (step, edges remaining).
  std::function<void(std::size_t, std::size_t)> on_step;
};

struct EdgeScore {
  EdgeId edge;
  double score;
};

struct TrajectoryStep {
  EdgeSubset active;
  // Edges removed to reach this step, with the score that selected them.
  std::vector<EdgeScore> removed;
};

struct Trajectory {
  Graph base;
  std::vector<TrajectoryStep> steps;  // steps.size() == K + 1
  std::size_t K = 0;
  std::string method;
  std::uint64_t seed = 0;
  // Scores of the full graph for static-ranking baselines.
  std::vector<EdgeScore> initial_scores;
};

// K budgets of floor/ceil(E0/K) summing to E0, larger ones first.
std::vector<std::size_t> step_budgets(std::size_t edges0, std::size_t K);

std::vector<EdgeScore> score_exact(const PredictorModel& m, const Graph& g,
                                   const EdgeSubset& active, const Task& task,
                                   unsigned threads = 1);
std::vector<EdgeScore> score_gradient(const PredictorModel& m, const Graph& g,
                                      const EdgeSubset& active, const Task& task);

// The `count` lowest scores, ordered by (score, edge id).
std::vector<EdgeScore> select_lowest(std::vector<EdgeScore> scores, std::size_t count);

Trajectory prune(const Graph& g, const Task& task, const PruneConfig& cfg);

Trajectory run_baseline(const Graph& g, BaselineMethod method, std::size_t K,
                        const BaselineParams& params);

std::string method_name(ScoringMode mode);

// Trajectory directory layout: step_000.edges ... step_K.edges,
// removed_k.csv for k = 1..K and trajectory.json.
void write_trajectory(const Trajectory& t, const std::filesystem::path& dir,
                      const nlohmann::json& config_echo);

struct TrajectoryManifest {
  std::string method;
  std::size_t K = 0;
  std::uint64_t seed = 0;
  nlohmann::json config;
  std::vector<std::size_t> edge_counts;
};

TrajectoryManifest read_manifest(const std::filesystem::path& dir);

// Rebuilds the step subsets against `base` from the step files.
Trajectory read_trajectory(const Graph& base, const std::filesystem::path& dir);

}  // namespace igprune
