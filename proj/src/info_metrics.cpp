#include "igprune/info_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <fmt/format.h>

#include "igprune/error.hpp"
#include "igprune/parallel.hpp"
#include "igprune/pruning.hpp"

namespace igprune {

double empirical_entropy(std::span<const int> labels) {
  if (labels.empty()) throw ValidationError("entropy of an empty label set");
  std::map<int, std::size_t> counts;
  for (int y : labels) ++counts[y];
  const double n = static_cast<double>(labels.size());
  double h = 0.0;
  for (const auto& [label, c] : counts) {
    const double p = static_cast<double>(c) / n;
    h -= p * std::log(p);
  }
  return h;
}

double complexity_score(std::size_t edges_k, std::size_t edges_0) {
  if (edges_0 == 0) throw ValidationError("complexity of a trajectory that starts edgeless");
  if (edges_k > edges_0) {
    throw ValidationError(fmt::format("{} edges exceeds the initial {}", edges_k, edges_0));
  }
  return static_cast<double>(edges_k) / static_cast<double>(edges_0);
}

double info_score(double mi_k, double mi_0, double mi_K, double eps) {
  const double span = mi_0 - mi_K;
  if (!(std::abs(span) > eps)) {
    throw DegenerateError(fmt::format(
        "information estimate does not change between the full and edgeless graph ({} vs {})",
        mi_0, mi_K));
  }
  return (mi_k - mi_K) / span;
}

namespace {

void check_curve(std::span<const CurvePoint> curve) {
  if (curve.size() < 2 || curve.front().complexity != 1.0 || curve.back().complexity != 0.0) {
    throw ValidationError("information-complexity curve must include complexity 1 and 0");
  }
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (!(curve[i].complexity < curve[i - 1].complexity)) {
      throw ValidationError("curve complexities must be strictly decreasing");
    }
  }
}

}  // namespace

double auc_ic(std::span<const CurvePoint> curve) {
  check_curve(curve);
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    const double width = curve[i - 1].complexity - curve[i].complexity;
    area += width * 0.5 * (curve[i - 1].info + curve[i].info);
  }
  return area;
}

double ibp(std::span<const CurvePoint> curve, double delta) {
  check_curve(curve);
  if (!(delta > 0.0 && delta <= 1.0)) throw ValidationError("delta must lie in (0, 1]");
  if (curve.front().info < delta) {
    throw ValidationError("no recorded step retains the target information");
  }
  double best = 1.0;
  for (const auto& p : curve) {
    if (p.info >= delta) best = std::min(best, p.complexity);
  }
  return best;
}

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Population standard deviation, so a single repetition reports 0.
double std_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

// Drops steps that repeat the previous complexity (zero-budget no-op steps).
std::vector<CurvePoint> distinct_points(const std::vector<CurvePoint>& pts) {
  std::vector<CurvePoint> out;
  for (const auto& p : pts) {
    if (out.empty() || p.complexity < out.back().complexity) out.push_back(p);
  }
  return out;
}

}  // namespace

SummaryMetrics evaluate_trajectory(const Trajectory& traj, const Task& task,
                                   const EvalConfig& cfg) {
  if (cfg.repetitions == 0) throw ValidationError("need at least one repetition");
  if (traj.steps.size() < 2) throw ValidationError("trajectory needs at least two steps");
  const Graph& g = traj.base;
  task.validate(g.num_nodes());
  const std::size_t edges0 = traj.steps.front().active.count();
  if (edges0 != g.num_edges() || edges0 == 0) {
    throw ValidationError("trajectory must start from the full graph");
  }
  if (!traj.steps.back().active.empty()) {
    throw ValidationError("trajectory must end with the edgeless graph");
  }

  const std::size_t n_steps = traj.steps.size();
  const std::size_t reps = cfg.repetitions;
  const double entropy = empirical_entropy(task.labels_on(Split::test));

  std::vector<double> mi(n_steps * reps), acc(n_steps * reps);
  parallel_for(n_steps * reps, cfg.threads, [&](std::size_t job) {
    const std::size_t k = job / reps, r = job % reps;
    TrainConfig tc = cfg.train;
    tc.seed = cfg.train.seed + r;
    const auto& active = traj.steps[k].active;
    const auto model = train(g, active, task, tc);
    const auto log_probs = forward(model, g, active);
    mi[job] = mi_lower_bound(entropy, mean_nll(log_probs, task, Split::test));
    std::size_t hits = 0;
    for (NodeId i : task.test) {
      Eigen::Index best = 0;
      log_probs.row(i).maxCoeff(&best);
      hits += (best == task.labels[i]);
    }
    acc[job] = static_cast<double>(hits) / static_cast<double>(task.test.size());
  });

  auto slice = [&](const std::vector<double>& v, std::size_t k) {
    return std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(k * reps),
                               v.begin() + static_cast<std::ptrdiff_t>((k + 1) * reps));
  };

  SummaryMetrics out;
  out.delta = cfg.delta;
  std::vector<double> mi_mean(n_steps);
  for (std::size_t k = 0; k < n_steps; ++k) mi_mean[k] = mean_of(slice(mi, k));
  const double mi0 = mi_mean.front(), miK = mi_mean.back();

  std::vector<CurvePoint> curve;
  for (std::size_t k = 0; k < n_steps; ++k) {
    StepMetrics s;
    s.step = k;
    s.edges_remaining = traj.steps[k].active.count();
    s.complexity = complexity_score(s.edges_remaining, edges0);
    s.mi_mean = mi_mean[k];
    s.mi_std = std_of(slice(mi, k));
    s.info_score = info_score(mi_mean[k], mi0, miK);
    s.accuracy_mean = mean_of(slice(acc, k));
    s.components = count_components(g, traj.steps[k].active);
    out.steps.push_back(s);
    curve.push_back({s.complexity, s.info_score});
  }
  // Endpoints are 1 and 0 by construction; pin them against rounding.
  out.steps.front().info_score = curve.front().info = 1.0;
  out.steps.back().info_score = curve.back().info = 0.0;

  const auto points = distinct_points(curve);
  out.auc_ic = auc_ic(points);
  out.ibp = ibp(points, cfg.delta);

  std::vector<double> rep_auc, rep_ibp;
  for (std::size_t r = 0; r < reps; ++r) {
    std::vector<CurvePoint> rc;
    for (std::size_t k = 0; k < n_steps; ++k) {
      rc.push_back({curve[k].complexity, info_score(mi[k * reps + r], mi0, miK)});
    }
    const auto rp = distinct_points(rc);
    rep_auc.push_back(auc_ic(rp));
    double b = 1.0;
    for (const auto& p : rp) {
      if (p.info >= cfg.delta) b = std::min(b, p.complexity);
    }
    rep_ibp.push_back(b);
  }
  out.auc_ic_std = std_of(rep_auc);
  out.ibp_std = std_of(rep_ibp);
  return out;
}

void write_metrics_csv(const SummaryMetrics& s, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << "step,edges,complexity,mi_mean,mi_std,info_score,acc_mean\n";
  for (const auto& m : s.steps) {
    out << fmt::format("{},{},{},{},{},{},{}\n", m.step, m.edges_remaining, m.complexity,
                       m.mi_mean, m.mi_std, m.info_score, m.accuracy_mean);
  }
}

nlohmann::json summary_json(const SummaryMetrics& s, const std::string& method,
                            std::uint64_t seed, const nlohmann::json& config) {
  nlohmann::ordered_json j;
  j["method"] = method;
  j["auc_ic"] = s.auc_ic;
  j["auc_ic_std"] = s.auc_ic_std;
  j["ibp"] = s.ibp;
  j["ibp_std"] = s.ibp_std;
  j["delta"] = s.delta;
  j["seed"] = seed;
  j["config"] = config;
  return nlohmann::json::parse(j.dump());
}

}  // namespace igprune
