#pragma once

// Synthetic node-classification targets: nodes are split into low / medium /
// high terciles of a structural statistic computed on the original graph.
// Labels are fixed once; pruning changes the graph, not the task.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "igprune/graph.hpp"

namespace igprune {

enum class CentralityKind { degree, degree_centrality, closeness, pagerank };

std::string centrality_name(CentralityKind k);
std::optional<CentralityKind> parse_centrality(const std::string& name);

struct CentralityVector {
  std::vector<double> values;
  CentralityKind kind;
};

struct PageRankOptions {
  double damping = 0.85;
  double tol = 1e-10;
  std::size_t max_iter = 200;
};

// Power iteration with uniform teleport; transitions are proportional to edge
// weight and dangling mass is spread uniformly. Converged when the L1 change
// drops below tol, otherwise throws ConvergenceError.
CentralityVector pagerank(const Graph& g, const EdgeSubset& active, PageRankOptions opt = {});

// Unweighted BFS closeness with Wasserman-Faust scaling:
// (R / sum of distances) * (R / (n - 1)), R = reachable other nodes.
CentralityVector closeness(const Graph& g, const EdgeSubset& active);

CentralityVector degree_like(const Graph& g, const EdgeSubset& active, CentralityKind kind);

CentralityVector compute_centrality(const Graph& g, CentralityKind kind);

// Ascending (value, node id) order cut into groups of ceil(n/3),
// ceil((n - ceil(n/3)) / 2) and the rest.
std::vector<int> tercile_labels(const CentralityVector& c);

// labels_<kind>.txt plus labels_<kind>.meta.json (kind, parameters, the value
// boundaries between groups).
void write_labels_with_meta(const CentralityVector& c, const std::vector<int>& labels,
                            const std::filesystem::path& dir, const nlohmann::json& parameters);

}  // namespace igprune
