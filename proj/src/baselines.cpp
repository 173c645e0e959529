#include "igprune/baselines.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "igprune/error.hpp"
#include "igprune/rng.hpp"

namespace igprune {

std::string baseline_name(BaselineMethod m) {
  switch (m) {
    case BaselineMethod::random_edge: return "RE";
    case BaselineMethod::random_node: return "RN";
    case BaselineMethod::forest_fire: return "EFF";
    case BaselineMethod::local_degree: return "LD";
    case BaselineMethod::local_similarity: return "LS";
    case BaselineMethod::scan: return "SCAN";
    case BaselineMethod::simmelian: return "SO";
  }
  return "?";
}

std::optional<BaselineMethod> parse_baseline(const std::string& name) {
  for (auto m : {BaselineMethod::random_edge, BaselineMethod::random_node,
                 BaselineMethod::forest_fire, BaselineMethod::local_degree,
                 BaselineMethod::local_similarity, BaselineMethod::scan,
                 BaselineMethod::simmelian}) {
    if (baseline_name(m) == name) return m;
  }
  return std::nullopt;
}

void BaselineParams::validate() const {
  if (!(forest_fire_burn_prob > 0.0 && forest_fire_burn_prob < 1.0)) {
    throw ValidationError("forest fire burn probability must lie in (0, 1)");
  }
  if (forest_fire_fires == 0) throw ValidationError("forest fire needs at least one fire");
  if (simmelian_max_rank == 0) throw ValidationError("simmelian max rank must be >= 1");
}

namespace {

// Sorted neighbor lists of the active subgraph.
std::vector<std::vector<NodeId>> active_neighbors(const Graph& g, const EdgeSubset& active) {
  std::vector<std::vector<NodeId>> nb(g.num_nodes());
  for (NodeId x = 0; x < g.num_nodes(); ++x) {
    for (const auto& inc : g.incident(x)) {
      if (active.contains(inc.edge)) nb[x].push_back(inc.neighbor);
    }
  }
  return nb;
}

std::size_t intersection_size(const std::vector<NodeId>& a, const std::vector<NodeId>& b) {
  std::size_t i = 0, j = 0, k = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++k, ++i, ++j;
    }
  }
  return k;
}

// |N[u] ∩ N[v]| for adjacent u, v: both endpoints plus shared neighbors.
std::size_t closed_overlap(const std::vector<NodeId>& nu, const std::vector<NodeId>& nv) {
  return intersection_size(nu, nv) + 2;
}

}  // namespace

EdgeValues score_random_edge(const Graph& g, const EdgeSubset& active, std::uint64_t seed) {
  EdgeValues out(g.num_edges(), 0.0);
  const auto ids = active.ids();
  Rng rng(seed);
  const auto perm = rng.permutation(ids.size());
  for (std::size_t k = 0; k < ids.size(); ++k) out[ids[k]] = perm[k];
  return out;
}

EdgeValues score_random_node(const Graph& g, const EdgeSubset& active,
                             std::span<const NodeId> order) {
  if (order.size() != g.num_nodes()) throw ShapeError("node order must cover every node");
  std::vector<std::size_t> position(g.num_nodes(), g.num_nodes());
  for (std::size_t i = 0; i < order.size(); ++i) position.at(order[i]) = i;
  EdgeValues out(g.num_edges(), 0.0);
  for (EdgeId id : active.ids()) {
    const Edge& e = g.edge(id);
    out[id] = static_cast<double>(std::min(position[e.u], position[e.v]));
  }
  return out;
}

EdgeValues score_random_node(const Graph& g, const EdgeSubset& active, std::uint64_t seed) {
  Rng rng(seed);
  const auto order = rng.permutation(g.num_nodes());
  return score_random_node(g, active, order);
}

EdgeValues score_forest_fire(const Graph& g, const EdgeSubset& active,
                             const BaselineParams& params) {
  params.validate();
  EdgeValues out(g.num_edges(), 0.0);
  const std::size_t n = g.num_nodes();
  if (n == 0 || active.empty()) return out;

  // Weight w acts as w independent burn attempts: p_e = 1 − (1 − p)^w.
  std::vector<double> burn_prob(g.num_edges(), 0.0);
  for (EdgeId id : active.ids()) {
    burn_prob[id] = 1.0 - std::pow(1.0 - params.forest_fire_burn_prob, g.edge(id).weight);
  }

  std::vector<std::size_t> edge_stamp(g.num_edges(), 0), node_stamp(n, 0);
  std::vector<NodeId> queue;
  for (std::size_t fire = 0; fire < params.forest_fire_fires; ++fire) {
    const std::size_t stamp = fire + 1;
    Rng rng(derive_seed(params.seed, fire));
    const auto start = static_cast<NodeId>(rng.below(n));
    node_stamp[start] = stamp;
    queue.assign(1, start);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      for (const auto& inc : g.incident(queue[head])) {
        if (!active.contains(inc.edge) || edge_stamp[inc.edge] == stamp) continue;
        edge_stamp[inc.edge] = stamp;
        if (rng.uniform() >= burn_prob[inc.edge]) continue;
        out[inc.edge] += 1.0;
        if (node_stamp[inc.neighbor] != stamp) {
          node_stamp[inc.neighbor] = stamp;
          queue.push_back(inc.neighbor);
        }
      }
    }
  }
  return out;
}

EdgeValues score_local_degree(const Graph& g, const EdgeSubset& active) {
  const auto nb = active_neighbors(g, active);
  EdgeValues out(g.num_edges(), 0.0);
  std::vector<NodeId> ranked;
  for (NodeId x = 0; x < g.num_nodes(); ++x) {
    const std::size_t d = nb[x].size();
    ranked = nb[x];
    std::sort(ranked.begin(), ranked.end(), [&](NodeId a, NodeId b) {
      if (nb[a].size() != nb[b].size()) return nb[a].size() > nb[b].size();
      return a < b;
    });
    for (std::size_t r = 0; r < ranked.size(); ++r) {
      // Rank 1 (highest-degree neighbor) scores 1, rank d scores 0.
      const double s = d > 1 ? 1.0 - std::log(static_cast<double>(r + 1)) /
                                         std::log(static_cast<double>(d))
                             : 1.0;
      const EdgeId id = *g.find_edge(x, ranked[r]);
      out[id] = std::max(out[id], s);
    }
  }
  return out;
}

EdgeValues score_local_similarity(const Graph& g, const EdgeSubset& active) {
  const auto nb = active_neighbors(g, active);
  EdgeValues out(g.num_edges(), 0.0);
  for (EdgeId id : active.ids()) {
    const Edge& e = g.edge(id);
    const double common = static_cast<double>(closed_overlap(nb[e.u], nb[e.v]));
    const double uni = static_cast<double>(nb[e.u].size() + 1 + nb[e.v].size() + 1) - common;
    out[id] = common / uni;
  }
  return out;
}

EdgeValues score_scan(const Graph& g, const EdgeSubset& active) {
  const auto nb = active_neighbors(g, active);
  EdgeValues out(g.num_edges(), 0.0);
  for (EdgeId id : active.ids()) {
    const Edge& e = g.edge(id);
    const double common = static_cast<double>(closed_overlap(nb[e.u], nb[e.v]));
    out[id] = common / std::sqrt(static_cast<double>((nb[e.u].size() + 1) * (nb[e.v].size() + 1)));
  }
  return out;
}

EdgeValues score_simmelian(const Graph& g, const EdgeSubset& active,
                           const BaselineParams& params) {
  params.validate();
  const auto nb = active_neighbors(g, active);
  const std::size_t n = g.num_nodes();
  std::vector<std::vector<NodeId>> top(n);
  std::vector<std::pair<std::size_t, NodeId>> ranked;
  for (NodeId x = 0; x < n; ++x) {
    ranked.clear();
    for (NodeId y : nb[x]) ranked.emplace_back(intersection_size(nb[x], nb[y]), y);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    const std::size_t keep = std::min(params.simmelian_max_rank, ranked.size());
    for (std::size_t i = 0; i < keep; ++i) top[x].push_back(ranked[i].second);
    std::sort(top[x].begin(), top[x].end());
  }
  EdgeValues out(g.num_edges(), 0.0);
  for (EdgeId id : active.ids()) {
    const Edge& e = g.edge(id);
    out[id] = static_cast<double>(intersection_size(top[e.u], top[e.v]));
  }
  return out;
}

EdgeValues score_baseline(BaselineMethod m, const Graph& g, const EdgeSubset& active,
                          const BaselineParams& params) {
  switch (m) {
    case BaselineMethod::random_edge: return score_random_edge(g, active, params.seed);
    case BaselineMethod::random_node: return score_random_node(g, active, params.seed);
    case BaselineMethod::forest_fire: return score_forest_fire(g, active, params);
    case BaselineMethod::local_degree: return score_local_degree(g, active);
    case BaselineMethod::local_similarity: return score_local_similarity(g, active);
    case BaselineMethod::scan: return score_scan(g, active);
    case BaselineMethod::simmelian: return score_simmelian(g, active, params);
  }
  throw ValidationError("unknown baseline method");
}

}  // namespace igprune
