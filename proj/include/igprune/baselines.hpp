#pragma once

// Heuristic edge scorers used as pruning baselines. Every scorer returns one
// value per active edge, indexed by edge id (size = g.num_edges(), inactive
// entries are 0), oriented so that LOW scores are removed first.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "igprune/graph.hpp"

namespace igprune {

enum class BaselineMethod {
  random_edge,       // RE
  random_node,       // RN
  forest_fire,       // EFF
  local_degree,      // LD
  local_similarity,  // LS
  scan,              // SCAN
  simmelian,         // SO
};

std::string baseline_name(BaselineMethod m);
std::optional<BaselineMethod> parse_baseline(const std::string& name);

struct BaselineParams {
  double forest_fire_burn_prob = 0.7;
  std::size_t forest_fire_fires = 1000;
  std::size_t simmelian_max_rank = 10;
  std::uint64_t seed = 42;
  // Re-run the forest fire on every intermediate graph instead of ranking once.
  bool forest_fire_per_step = false;

  void validate() const;
};

using EdgeValues = std::vector<double>;

// Rank of each edge in a seeded uniform permutation.
EdgeValues score_random_edge(const Graph& g, const EdgeSubset& active, std::uint64_t seed);

// Earliest draw position of either endpoint in a seeded node order.
EdgeValues score_random_node(const Graph& g, const EdgeSubset& active, std::uint64_t seed);
EdgeValues score_random_node(const Graph& g, const EdgeSubset& active,
                             std::span<const NodeId> order);

// Burn counts over `fires` independent breadth-first fires.
EdgeValues score_forest_fire(const Graph& g, const EdgeSubset& active,
                             const BaselineParams& params);

EdgeValues score_local_degree(const Graph& g, const EdgeSubset& active);

// Jaccard similarity of the closed neighborhoods of the endpoints.
EdgeValues score_local_similarity(const Graph& g, const EdgeSubset& active);

// |N[u] ∩ N[v]| / sqrt(|N[u]| |N[v]|) on closed neighborhoods.
EdgeValues score_scan(const Graph& g, const EdgeSubset& active);

// Overlap of the endpoints' top-r neighbors ranked by embeddedness.
EdgeValues score_simmelian(const Graph& g, const EdgeSubset& active,
                           const BaselineParams& params);

EdgeValues score_baseline(BaselineMethod m, const Graph& g, const EdgeSubset& active,
                          const BaselineParams& params);

}  // namespace igprune
