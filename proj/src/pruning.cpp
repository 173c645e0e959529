#include "igprune/pruning.hpp"

#include <algorithm>
#include <fstream>

#include <fmt/format.h>

#include "igprune/error.hpp"
#include "igprune/parallel.hpp"

namespace igprune {

std::vector<std::size_t> step_budgets(std::size_t edges0, std::size_t K) {
  if (K == 0) throw ValidationError("number of pruning steps must be >= 1");
  std::vector<std::size_t> out(K, edges0 / K);
  for (std::size_t k = 0; k < edges0 % K; ++k) ++out[k];
  return out;
}

std::string method_name(ScoringMode mode) {
  return mode == ScoringMode::exact ? "igprune-exact" : "igprune-gradient";
}

std::vector<EdgeScore> score_exact(const PredictorModel& m, const Graph& g,
                                   const EdgeSubset& active, const Task& task, unsigned threads) {
  const auto projected = project_features(m, g);
  const double base =
      mean_nll(log_probs_from_projection(m, normalize_adjacency(g, active), projected), task,
               Split::val);
  const auto ids = active.ids();
  std::vector<EdgeScore> out(ids.size());
  parallel_for(ids.size(), threads, [&](std::size_t i) {
    EdgeSubset without = active;
    without.erase(ids[i]);
    const double masked =
        mean_nll(log_probs_from_projection(m, normalize_adjacency(g, without), projected), task,
                 Split::val);
    out[i] = {ids[i], masked - base};
  });
  return out;
}

std::vector<EdgeScore> score_gradient(const PredictorModel& m, const Graph& g,
                                      const EdgeSubset& active, const Task& task) {
  std::vector<EdgeScore> out;
  for (const auto& [id, grad] : adjacency_gradient(m, g, active, task)) {
    out.push_back({id, -g.edge(id).weight * grad});
  }
  return out;
}

std::vector<EdgeScore> select_lowest(std::vector<EdgeScore> scores, std::size_t count) {
  count = std::min(count, scores.size());
  auto by_score_then_id = [](const EdgeScore& a, const EdgeScore& b) {
    if (a.score != b.score) return a.score < b.score;
    return a.edge < b.edge;
  };
  std::partial_sort(scores.begin(), scores.begin() + static_cast<std::ptrdiff_t>(count),
                    scores.end(), by_score_then_id);
  scores.resize(count);
  return scores;
}

namespace {

TrajectoryStep take_step(const TrajectoryStep& prev, std::vector<EdgeScore> removed) {
  TrajectoryStep next{prev.active, std::move(removed)};
  for (const auto& r : next.removed) next.active.erase(r.edge);
  return next;
}

}  // namespace

Trajectory prune(const Graph& g, const Task& task, const PruneConfig& cfg) {
  if (g.num_edges() == 0) throw ValidationError("cannot prune a graph without edges");
  cfg.train.validate();
  task.validate(g.num_nodes());
  const auto budgets = step_budgets(g.num_edges(), cfg.steps);

  Trajectory t{g, {}, cfg.steps, method_name(cfg.mode), cfg.seed, {}};
  t.steps.push_back({g.all_edges(), {}});
  for (std::size_t k = 1; k <= cfg.steps; ++k) {
    const TrajectoryStep& prev = t.steps.back();
    const std::size_t n_remove = std::min(budgets[k - 1], prev.active.count());
    if (n_remove == 0) {
      t.steps.push_back({prev.active, {}});
      continue;
    }
    TrainConfig tc = cfg.train;
    tc.seed = cfg.seed + (k - 1);
    PredictorModel model;
    try {
      model = train(g, prev.active, task, tc);
    } catch (const DivergenceError& e) {
      throw DivergenceError(fmt::format("pruning step {}: {}", k, e.what()), e.epoch());
    }
    auto scores = cfg.mode == ScoringMode::exact
                      ? score_exact(model, g, prev.active, task, cfg.threads)
                      : score_gradient(model, g, prev.active, task);
    t.steps.push_back(take_step(prev, select_lowest(std::move(scores), n_remove)));
    if (cfg.on_step) cfg.on_step(k, t.steps.back().active.count());
  }
  return t;
}

Trajectory run_baseline(const Graph& g, BaselineMethod method, std::size_t K,
                        const BaselineParams& params) {
  params.validate();
  const auto budgets = step_budgets(g.num_edges(), K);
  const auto full = g.all_edges();
  auto to_scores = [](const EdgeValues& values, const EdgeSubset& active) {
    std::vector<EdgeScore> out;
    for (EdgeId id : active.ids()) out.push_back({id, values[id]});
    return out;
  };
  const EdgeValues ranking = score_baseline(method, g, full, params);
  const bool rescore = method == BaselineMethod::forest_fire && params.forest_fire_per_step;

  Trajectory t{g, {}, K, baseline_name(method), params.seed, to_scores(ranking, full)};
  t.steps.push_back({full, {}});
  for (std::size_t k = 1; k <= K; ++k) {
    const TrajectoryStep& prev = t.steps.back();
    const std::size_t n_remove = std::min(budgets[k - 1], prev.active.count());
    if (n_remove == 0) {
      t.steps.push_back({prev.active, {}});
      continue;
    }
    const EdgeValues values =
        rescore && k > 1 ? score_baseline(method, g, prev.active, params) : ranking;
    t.steps.push_back(take_step(prev, select_lowest(to_scores(values, prev.active), n_remove)));
  }
  return t;
}

// ---------------------------------------------------------------------------
// Trajectory directories

namespace {

constexpr const char* kTrajectoryFormat = "igprune-trajectory";
constexpr int kTrajectoryVersion = 1;

std::string step_file(std::size_t k) { return fmt::format("step_{:03}.edges", k); }
std::string removed_file(std::size_t k) { return fmt::format("removed_{:03}.csv", k); }

void write_scores(const Graph& g, const std::vector<EdgeScore>& scores,
                  const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << "edge_id,u,v,score\n";
  for (const auto& s : scores) {
    const Edge& e = g.edge(s.edge);
    out << fmt::format("{},{},{},{}\n", s.edge, e.u, e.v, s.score);
  }
}

}  // namespace

void write_trajectory(const Trajectory& t, const std::filesystem::path& dir,
                      const nlohmann::json& config_echo) {
  std::filesystem::create_directories(dir);
  std::vector<std::size_t> counts;
  std::vector<std::string> files;
  for (std::size_t k = 0; k < t.steps.size(); ++k) {
    save_edge_list(t.base, t.steps[k].active, dir / step_file(k));
    counts.push_back(t.steps[k].active.count());
    files.push_back(step_file(k));
    if (k > 0) write_scores(t.base, t.steps[k].removed, dir / removed_file(k));
  }
  if (!t.initial_scores.empty()) write_scores(t.base, t.initial_scores, dir / "scores.csv");

  nlohmann::ordered_json manifest;
  manifest["format"] = kTrajectoryFormat;
  manifest["version"] = kTrajectoryVersion;
  manifest["method"] = t.method;
  manifest["K"] = t.K;
  manifest["seed"] = t.seed;
  manifest["num_nodes"] = t.base.num_nodes();
  manifest["num_edges"] = t.base.num_edges();
  manifest["edge_counts"] = counts;
  manifest["steps"] = files;
  manifest["config"] = config_echo;
  std::ofstream out(dir / "trajectory.json", std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + (dir / "trajectory.json").string());
  out << manifest.dump(2) << '\n';
}

TrajectoryManifest read_manifest(const std::filesystem::path& dir) {
  const auto path = dir / "trajectory.json";
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "missing trajectory manifest");
  try {
    nlohmann::json j;
    in >> j;
    if (j.at("format") != kTrajectoryFormat || j.at("version") != kTrajectoryVersion) {
      throw ParseError(path.string(), 0, "unsupported trajectory manifest");
    }
    TrajectoryManifest m;
    m.method = j.at("method").get<std::string>();
    m.K = j.at("K").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config = j.value("config", nlohmann::json::object());
    m.edge_counts = j.at("edge_counts").get<std::vector<std::size_t>>();
    if (m.edge_counts.size() != m.K + 1) {
      throw ParseError(path.string(), 0, "edge_counts does not have K + 1 entries");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string(), 0, e.what());
  }
}

Trajectory read_trajectory(const Graph& base, const std::filesystem::path& dir) {
  const auto manifest = read_manifest(dir);
  Trajectory t{base, {}, manifest.K, manifest.method, manifest.seed, {}};
  for (std::size_t k = 0; k <= manifest.K; ++k) {
    const auto path = dir / step_file(k);
    if (!std::filesystem::exists(path)) {
      throw ParseError((dir / "trajectory.json").string(), 0,
                       fmt::format("missing step file {}", step_file(k)));
    }
    // Step files reuse the edge-list format; resolve rows to base edge ids.
    EdgeSubset active = EdgeSubset::none(base.num_edges());
    for (const Edge& e : load_edge_rows(path)) {
      auto id = base.find_edge(e.u, e.v);
      if (!id) {
        throw ValidationError(
            fmt::format("{}: edge ({}, {}) is not in the base graph", path.string(), e.u, e.v));
      }
      active.insert(*id);
    }
    if (active.count() != manifest.edge_counts[k]) {
      throw ValidationError(fmt::format("{}: {} edges, manifest says {}", path.string(),
                                        active.count(), manifest.edge_counts[k]));
    }
    if (!t.steps.empty() && !active.is_subset_of(t.steps.back().active)) {
      throw ValidationError(fmt::format("step {} is not nested in step {}", k, k - 1));
    }
    t.steps.push_back({std::move(active), {}});
  }
  return t;
}

}  // namespace igprune
