#include "igprune/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

#include "igprune/error.hpp"

namespace igprune {

std::string centrality_name(CentralityKind k) {
  switch (k) {
    case CentralityKind::degree: return "degree";
    case CentralityKind::degree_centrality: return "degree_centrality";
    case CentralityKind::closeness: return "closeness";
    case CentralityKind::pagerank: return "pagerank";
  }
  return "?";
}

std::optional<CentralityKind> parse_centrality(const std::string& name) {
  for (auto k : {CentralityKind::degree, CentralityKind::degree_centrality,
                 CentralityKind::closeness, CentralityKind::pagerank}) {
    if (centrality_name(k) == name) return k;
  }
  return std::nullopt;
}

CentralityVector pagerank(const Graph& g, const EdgeSubset& active, PageRankOptions opt) {
  if (!(opt.damping > 0.0 && opt.damping < 1.0)) {
    throw ValidationError("damping must lie in (0, 1)");
  }
  const std::size_t n = g.num_nodes();
  if (n == 0) return {{}, CentralityKind::pagerank};
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<double> strength(n, 0.0);
  for (EdgeId id : active.ids()) {
    const Edge& e = g.edge(id);
    strength[e.u] += e.weight;
    strength[e.v] += e.weight;
  }

  std::vector<double> rank(n, inv_n), next(n);
  double residual = 0.0;
  for (std::size_t iter = 0; iter < opt.max_iter; ++iter) {
    double dangling = 0.0;
    for (NodeId i = 0; i < n; ++i) {
      if (strength[i] == 0.0) dangling += rank[i];
    }
    const double base = (1.0 - opt.damping) * inv_n + opt.damping * dangling * inv_n;
    for (NodeId v = 0; v < n; ++v) {
      double inflow = 0.0;
      for (const auto& inc : g.incident(v)) {
        if (!active.contains(inc.edge)) continue;
        inflow += rank[inc.neighbor] * g.edge(inc.edge).weight / strength[inc.neighbor];
      }
      next[v] = base + opt.damping * inflow;
    }
    residual = 0.0;
    for (NodeId i = 0; i < n; ++i) residual += std::abs(next[i] - rank[i]);
    rank.swap(next);
    if (residual < opt.tol) return {rank, CentralityKind::pagerank};
  }
  throw ConvergenceError(fmt::format("pagerank did not converge in {} iterations", opt.max_iter),
                         residual);
}

CentralityVector closeness(const Graph& g, const EdgeSubset& active) {
  const std::size_t n = g.num_nodes();
  std::vector<double> out(n, 0.0);
  std::vector<std::size_t> dist(n);
  std::vector<NodeId> queue;
  constexpr auto unseen = static_cast<std::size_t>(-1);
  for (NodeId s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), unseen);
    dist[s] = 0;
    queue.assign(1, s);
    std::size_t total = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const NodeId x = queue[head];
      for (const auto& inc : g.incident(x)) {
        if (!active.contains(inc.edge) || dist[inc.neighbor] != unseen) continue;
        dist[inc.neighbor] = dist[x] + 1;
        total += dist[inc.neighbor];
        queue.push_back(inc.neighbor);
      }
    }
    const double reach = static_cast<double>(queue.size() - 1);
    if (reach > 0.0 && n > 1) {
      out[s] = (reach / static_cast<double>(total)) * (reach / static_cast<double>(n - 1));
    }
  }
  return {out, CentralityKind::closeness};
}

CentralityVector degree_like(const Graph& g, const EdgeSubset& active, CentralityKind kind) {
  if (kind != CentralityKind::degree && kind != CentralityKind::degree_centrality) {
    throw ValidationError("degree_like handles degree and degree_centrality only");
  }
  const std::size_t n = g.num_nodes();
  std::vector<double> out(n, 0.0);
  for (EdgeId id : active.ids()) {
    const Edge& e = g.edge(id);
    out[e.u] += 1.0;
    out[e.v] += 1.0;
  }
  if (kind == CentralityKind::degree_centrality && n > 1) {
    for (double& x : out) x /= static_cast<double>(n - 1);
  }
  return {out, kind};
}

CentralityVector compute_centrality(const Graph& g, CentralityKind kind) {
  const auto all = g.all_edges();
  switch (kind) {
    case CentralityKind::degree:
    case CentralityKind::degree_centrality: return degree_like(g, all, kind);
    case CentralityKind::closeness: return closeness(g, all);
    case CentralityKind::pagerank: return pagerank(g, all);
  }
  throw ValidationError("unknown centrality kind");
}

namespace {

std::vector<NodeId> ascending_order(const CentralityVector& c) {
  std::vector<NodeId> order(c.values.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
    if (c.values[a] != c.values[b]) return c.values[a] < c.values[b];
    return a < b;
  });
  return order;
}

std::pair<std::size_t, std::size_t> group_sizes(std::size_t n) {
  const std::size_t low = (n + 2) / 3;
  const std::size_t mid = (n - low + 1) / 2;
  return {low, mid};
}

}  // namespace

std::vector<int> tercile_labels(const CentralityVector& c) {
  const std::size_t n = c.values.size();
  if (n < 3) throw ValidationError(fmt::format("need at least 3 nodes for terciles, got {}", n));
  for (double x : c.values) {
    if (!std::isfinite(x)) throw ValidationError("centrality values must be finite");
  }
  const auto order = ascending_order(c);
  const auto [low, mid] = group_sizes(n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[order[i]] = i < low ? 0 : (i < low + mid ? 1 : 2);
  return labels;
}

void write_labels_with_meta(const CentralityVector& c, const std::vector<int>& labels,
                            const std::filesystem::path& dir, const nlohmann::json& parameters) {
  std::filesystem::create_directories(dir);
  const auto name = centrality_name(c.kind);
  save_labels(labels, dir / fmt::format("labels_{}.txt", name));

  const auto order = ascending_order(c);
  const auto [low, mid] = group_sizes(c.values.size());
  nlohmann::ordered_json meta;
  meta["kind"] = name;
  meta["num_nodes"] = c.values.size();
  meta["parameters"] = parameters;
  meta["group_sizes"] = {low, mid, c.values.size() - low - mid};
  // Largest value in the low and medium groups.
  meta["boundaries"] = {c.values[order[low - 1]], c.values[order[low + mid - 1]]};
  std::ofstream out(dir / fmt::format("labels_{}.meta.json", name),
                    std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write label metadata");
  out << meta.dump(2) << '\n';
}

}  // namespace igprune
