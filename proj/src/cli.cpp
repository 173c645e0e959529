#include "igprune/cli.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "igprune/baselines.hpp"
#include "igprune/error.hpp"
#include "igprune/info_metrics.hpp"
#include "igprune/pruning.hpp"
#include "igprune/tasks.hpp"

namespace igprune::cli {

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace

nlohmann::ordered_json DatasetSpec::to_json() const {
  nlohmann::ordered_json j;
  if (!builtin.empty()) {
    j["builtin"] = builtin;
  } else {
    j["edges"] = edges;
    if (!features.empty()) j["features"] = features;
    if (!labels.empty()) j["labels"] = labels;
    if (!splits.empty()) j["splits"] = splits;
    j["merge_sum"] = merge_sum;
  }
  j["task"] = task;
  j["split_seed"] = split_seed;
  return j;
}

DatasetSpec DatasetSpec::from_json(const nlohmann::json& j) {
  DatasetSpec s;
  s.builtin = j.value("builtin", "");
  s.edges = j.value("edges", "");
  s.features = j.value("features", "");
  s.labels = j.value("labels", "");
  s.splits = j.value("splits", "");
  s.merge_sum = j.value("merge_sum", false);
  s.task = j.value("task", "original");
  s.split_seed = j.value("split_seed", std::uint64_t{42});
  return s;
}

namespace {

void check_spec(const DatasetSpec& s) {
  const bool has_paths = !s.edges.empty() || !s.features.empty() || !s.labels.empty() ||
                         !s.splits.empty();
  if (!s.builtin.empty() && has_paths) {
    throw UsageError("--builtin cannot be combined with --edges/--features/--labels/--splits");
  }
  if (s.builtin.empty() && s.edges.empty()) throw UsageError("give --builtin or --edges");
  if (!s.builtin.empty() && s.builtin != "karate") {
    throw UsageError(fmt::format("unknown builtin dataset '{}'", s.builtin));
  }
  if (s.task != "original" && !parse_centrality(s.task)) {
    throw UsageError(fmt::format("unknown task '{}'", s.task));
  }
  if (s.task == "original" && s.builtin.empty() && s.labels.empty()) {
    throw UsageError("task 'original' needs --labels");
  }
}

Graph load_path_graph(const DatasetSpec& s) {
  const LoadOptions opts{s.merge_sum};
  if (!s.features.empty()) return load_graph(s.edges, s.features, opts);
  std::size_t n = 0;
  if (!s.labels.empty()) {
    n = load_labels(s.labels).size();
  } else {
    for (const Edge& e : load_edge_rows(s.edges)) n = std::max<std::size_t>(n, std::max(e.u, e.v) + 1);
  }
  return load_graph(s.edges, n, opts);
}

}  // namespace

Dataset load_dataset(const DatasetSpec& spec) {
  check_spec(spec);
  Graph g;
  std::vector<int> labels;
  SplitMasks split;
  if (!spec.builtin.empty()) {
    auto [kg, kt] = builtin_karate(spec.split_seed);
    g = std::move(kg);
    labels = kt.labels;
    split = {kt.train, kt.val, kt.test};
  } else {
    g = load_path_graph(spec);
    if (!spec.labels.empty()) labels = load_labels(spec.labels);
    split = spec.splits.empty() ? gen_split(g.num_nodes(), spec.split_seed)
                                : load_splits(spec.splits);
  }
  if (auto kind = parse_centrality(spec.task)) {
    labels = tercile_labels(compute_centrality(g, *kind));
  }
  if (labels.size() != g.num_nodes()) {
    throw ValidationError(
        fmt::format("{} labels for a graph with {} nodes", labels.size(), g.num_nodes()));
  }
  Task task = make_task(std::move(labels), std::move(split));
  task.validate(g.num_nodes());
  return {std::move(g), std::move(task)};
}

namespace {

struct TrainFlags {
  std::size_t epochs = 200;
  std::size_t hidden = 128;
  double lr = 1e-2;
  double weight_decay = 5e-4;

  TrainConfig config(std::uint64_t seed) const {
    TrainConfig c;
    c.epochs = epochs;
    c.hidden_dim = hidden;
    c.learning_rate = lr;
    c.weight_decay = weight_decay;
    c.seed = seed;
    return c;
  }
};

nlohmann::ordered_json train_json(const TrainFlags& t) {
  nlohmann::ordered_json j;
  j["epochs"] = t.epochs;
  j["hidden"] = t.hidden;
  j["lr"] = t.lr;
  j["weight_decay"] = t.weight_decay;
  return j;
}

struct Options {
  DatasetSpec data;
  TrainFlags train;
  std::string method = "igprune-exact";
  std::size_t steps = 10;
  std::uint64_t seed = 42;
  std::size_t reps = 5;
  double delta = 0.8;
  unsigned threads = 0;
  std::string out;
  BaselineParams baseline;
  std::string traj_dir;
  std::vector<std::string> run_dirs;
};

void add_dataset_flags(CLI::App* cmd, Options& o) {
  auto* builtin = cmd->add_option("--builtin", o.data.builtin, "Built-in dataset (karate)");
  cmd->add_option("--edges", o.data.edges, "Edge list: u v [w] per line")->excludes(builtin);
  cmd->add_option("--features", o.data.features, "Node feature CSV, one row per node")
      ->excludes(builtin);
  cmd->add_option("--labels", o.data.labels, "One integer label per line")->excludes(builtin);
  cmd->add_option("--splits", o.data.splits, "JSON with train/val/test node lists")
      ->excludes(builtin);
  cmd->add_flag("--merge-sum", o.data.merge_sum, "Sum weights of repeated edges");
  cmd->add_option("--task", o.data.task,
                  "original | degree | degree_centrality | closeness | pagerank")
      ->capture_default_str();
  cmd->add_option("--split-seed", o.data.split_seed, "Seed of the generated node split")
      ->capture_default_str();
}

void add_train_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--epochs", o.train.epochs)->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--hidden", o.train.hidden)->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--lr", o.train.lr)->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--weight-decay", o.train.weight_decay)
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
}

void add_threads_flag(CLI::App* cmd, Options& o) {
  cmd->add_option("--threads", o.threads, "Worker threads, 0 = all cores")->capture_default_str();
}

void write_json(const nlohmann::json& j, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

int cmd_prune(const Options& o, std::ostream& out, std::ostream& err) {
  const bool is_igprune = o.method == "igprune-exact" || o.method == "igprune-gradient";
  const auto baseline = parse_baseline(o.method);
  if (!is_igprune && !baseline) throw UsageError(fmt::format("unknown method '{}'", o.method));
  const Dataset d = load_dataset(o.data);
  const fs::path dir = o.out.empty() ? fs::path(fmt::format("{}-seed{}", o.method, o.seed))
                                     : fs::path(o.out);

  nlohmann::ordered_json echo;
  echo["dataset"] = o.data.to_json();
  echo["method"] = o.method;
  echo["steps"] = o.steps;
  echo["seed"] = o.seed;

  fmt::print(err, "{}: {} nodes, {} edges, {} steps\n", o.method, d.graph.num_nodes(),
             d.graph.num_edges(), o.steps);
  Trajectory t;
  if (is_igprune) {
    PruneConfig cfg;
    cfg.steps = o.steps;
    cfg.mode = o.method == "igprune-exact" ? ScoringMode::exact : ScoringMode::gradient;
    cfg.train = o.train.config(o.seed);
    cfg.seed = o.seed;
    cfg.threads = o.threads;
    cfg.on_step = [&](std::size_t k, std::size_t left) {
      fmt::print(err, "  step {}/{}: {} edges left\n", k, o.steps, left);
    };
    echo["train"] = train_json(o.train);
    t = prune(d.graph, d.task, cfg);
  } else {
    BaselineParams params = o.baseline;
    params.seed = o.seed;
    nlohmann::ordered_json b;
    b["burn_prob"] = params.forest_fire_burn_prob;
    b["fires"] = params.forest_fire_fires;
    b["simmelian_max_rank"] = params.simmelian_max_rank;
    b["forest_fire_per_step"] = params.forest_fire_per_step;
    echo["baseline"] = b;
    echo["train"] = train_json(o.train);
    t = run_baseline(d.graph, *baseline, o.steps, params);
  }
  write_trajectory(t, dir, echo);
  fmt::print(out, "{}\n", (dir / "trajectory.json").string());
  return kExitOk;
}

int cmd_eval(const Options& o, const CLI::App& cmd, std::ostream& out, std::ostream& err) {
  const fs::path dir = o.traj_dir;
  const auto manifest = read_manifest(dir);
  const nlohmann::json& echo = manifest.config;
  if (!echo.contains("dataset")) {
    throw ParseError((dir / "trajectory.json").string(), 0, "manifest has no dataset config");
  }
  const DatasetSpec spec = DatasetSpec::from_json(echo["dataset"]);
  const Dataset d = load_dataset(spec);
  const Trajectory traj = read_trajectory(d.graph, dir);

  // Training flags given on this command win over those recorded at prune time.
  TrainFlags tf;
  const auto recorded = echo.value("train", nlohmann::json::object());
  tf.epochs = cmd.count("--epochs") ? o.train.epochs : recorded.value("epochs", tf.epochs);
  tf.hidden = cmd.count("--hidden") ? o.train.hidden : recorded.value("hidden", tf.hidden);
  tf.lr = cmd.count("--lr") ? o.train.lr : recorded.value("lr", tf.lr);
  tf.weight_decay = cmd.count("--weight-decay") ? o.train.weight_decay
                                                : recorded.value("weight_decay", tf.weight_decay);
  const std::uint64_t seed = cmd.count("--seed") ? o.seed : manifest.seed;

  EvalConfig cfg;
  cfg.train = tf.config(seed);
  cfg.repetitions = o.reps;
  cfg.delta = o.delta;
  cfg.threads = o.threads;
  fmt::print(err, "evaluating {} ({} steps x {} repetitions)\n", manifest.method,
             traj.steps.size(), o.reps);
  const SummaryMetrics s = evaluate_trajectory(traj, d.task, cfg);

  const fs::path out_dir = o.out.empty() ? dir : fs::path(o.out);
  fs::create_directories(out_dir);
  write_metrics_csv(s, out_dir / "metrics.csv");
  nlohmann::ordered_json config;
  config["dataset"] = spec.to_json();
  config["reps"] = o.reps;
  config["train"] = train_json(tf);
  write_json(summary_json(s, manifest.method, seed, config), out_dir / "summary.json");
  fmt::print(out, "AUC-IC {:.4f} +- {:.4f}\nIBP {:.4f} +- {:.4f} (delta {})\n", s.auc_ic,
             s.auc_ic_std, s.ibp, s.ibp_std, s.delta);
  return kExitOk;
}

struct CompareRow {
  std::string method;
  double auc_ic, auc_ic_std, ibp, ibp_std;
  std::string run;
};

int cmd_compare(const Options& o, std::ostream& out, std::ostream& err) {
  std::vector<CompareRow> rows;
  for (const auto& run : o.run_dirs) {
    const fs::path path = fs::path(run) / "summary.json";
    std::ifstream in(path);
    if (!in) {
      fmt::print(err, "warning: {} has no summary.json, skipped\n", run);
      continue;
    }
    try {
      const auto j = nlohmann::json::parse(in);
      rows.push_back({j.at("method").get<std::string>(), j.at("auc_ic").get<double>(),
                      j.value("auc_ic_std", 0.0), j.at("ibp").get<double>(),
                      j.value("ibp_std", 0.0), run});
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string(), 0, e.what());
    }
  }
  if (rows.empty()) {
    fmt::print(err, "error: none of the {} runs has been evaluated\n", o.run_dirs.size());
    return kExitData;
  }
  std::stable_sort(rows.begin(), rows.end(), [](const CompareRow& a, const CompareRow& b) {
    if (a.auc_ic != b.auc_ic) return a.auc_ic > b.auc_ic;
    return a.method < b.method;
  });

  std::size_t width = 6;
  for (const auto& r : rows) width = std::max(width, r.method.size());
  fmt::print(out, "{:<{}}  {:>15}  {:>15}\n", "method", width, "AUC-IC", "IBP");
  for (const auto& r : rows) {
    fmt::print(out, "{:<{}}  {:>15}  {:>15}\n", r.method, width,
               fmt::format("{:.2f}+-{:.2f}", r.auc_ic, r.auc_ic_std),
               fmt::format("{:.2f}+-{:.2f}", r.ibp, r.ibp_std));
  }

  const fs::path out_dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
  fs::create_directories(out_dir);
  std::ofstream csv(out_dir / "comparison.csv", std::ios::binary | std::ios::trunc);
  if (!csv) throw Error("cannot write comparison.csv");
  csv << "method,auc_ic,auc_ic_std,ibp,ibp_std,run\n";
  for (const auto& r : rows) {
    csv << fmt::format("{},{},{},{},{},{}\n", r.method, r.auc_ic, r.auc_ic_std, r.ibp, r.ibp_std,
                       r.run);
  }
  return kExitOk;
}

int cmd_labels(const Options& o, std::ostream& out) {
  const auto kind = parse_centrality(o.data.task);
  if (!kind) throw UsageError("labels needs a synthetic --task");
  DatasetSpec spec = o.data;
  const Dataset d = load_dataset(spec);
  const CentralityVector c = compute_centrality(d.graph, *kind);
  nlohmann::json params = nlohmann::json::object();
  if (*kind == CentralityKind::pagerank) {
    const PageRankOptions pr;
    params["damping"] = pr.damping;
    params["tol"] = pr.tol;
    params["max_iter"] = pr.max_iter;
  }
  const fs::path dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
  write_labels_with_meta(c, d.task.labels, dir, params);
  fmt::print(out, "{}\n", (dir / fmt::format("labels_{}.txt", o.data.task)).string());
  return kExitOk;
}

bool given(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return a == flag || a.rfind(flag + "=", 0) == 0;
  });
}

// Splices the entries of `--config FILE` in as flags right after the
// subcommand. Keys also given on the command line are skipped, so flags win.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::string file;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 == args.size()) throw CLI::ArgumentMismatch("--config needs a file");
      file = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      file = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (file.empty() || rest.empty()) return rest;
  const std::string& sub = rest.front();
  std::vector<std::string> injected;
  for (const CLI::ConfigItem& item : CLI::ConfigINI().from_file(file)) {
    if (!item.parents.empty() && item.parents != std::vector<std::string>{sub}) continue;
    const std::string flag = "--" + item.name;
    if (given(rest, flag)) continue;
    if (item.inputs.size() == 1 && (item.inputs[0] == "true" || item.inputs[0] == "false")) {
      if (item.inputs[0] == "true") injected.push_back(flag);
      continue;
    }
    injected.push_back(flag);
    injected.insert(injected.end(), item.inputs.begin(), item.inputs.end());
  }
  rest.insert(rest.begin() + 1, injected.begin(), injected.end());
  return rest;
}

int cmd_remap(const Options& o, std::ostream& out) {
  if (o.data.edges.empty() || o.out.empty()) throw UsageError("remap needs --edges and --out");
  const auto table = remap_edge_list(o.data.edges, o.out);
  const fs::path ids = o.out + ".ids";
  std::ofstream f(ids, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write " + ids.string());
  for (const auto& external : table) f << external << '\n';
  fmt::print(out, "{} nodes\n", table.size());
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Information-guided multi-step graph pruning", "igprune"};
  app.require_subcommand(1);
  Options o;

  auto* prune_cmd = app.add_subcommand("prune", "Build a K-step pruning trajectory");
  std::string config_file;
  prune_cmd->add_option("--config", config_file, "Key-value config file; flags override it");
  add_dataset_flags(prune_cmd, o);
  add_train_flags(prune_cmd, o);
  add_threads_flag(prune_cmd, o);
  prune_cmd->add_option("--method", o.method,
                        "igprune-exact | igprune-gradient | RE | RN | EFF | LD | LS | SCAN | SO")
      ->capture_default_str();
  prune_cmd->add_option("--steps", o.steps, "Number of pruning steps K")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  prune_cmd->add_option("--seed", o.seed)->capture_default_str();
  prune_cmd->add_option("--out", o.out, "Trajectory directory");
  prune_cmd->add_option("--burn-prob", o.baseline.forest_fire_burn_prob)->capture_default_str();
  prune_cmd->add_option("--fires", o.baseline.forest_fire_fires)->capture_default_str();
  prune_cmd->add_option("--simmelian-rank", o.baseline.simmelian_max_rank)->capture_default_str();
  prune_cmd->add_flag("--fire-per-step", o.baseline.forest_fire_per_step,
                      "Re-run the forest fire on each intermediate graph");

  auto* eval_cmd = app.add_subcommand("eval", "Measure information along a trajectory");
  eval_cmd->add_option("--config", config_file, "Key-value config file; flags override it");
  eval_cmd->add_option("trajectory", o.traj_dir, "Trajectory directory")->required();
  add_train_flags(eval_cmd, o);
  add_threads_flag(eval_cmd, o);
  eval_cmd->add_option("--reps", o.reps, "Predictors trained per step")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  eval_cmd->add_option("--delta", o.delta, "Information threshold for IBP")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  eval_cmd->add_option("--seed", o.seed, "First training seed (default: trajectory seed)");
  eval_cmd->add_option("--out", o.out, "Output directory (default: the trajectory directory)");

  auto* compare_cmd = app.add_subcommand("compare", "Tabulate evaluated runs");
  compare_cmd->add_option("runs", o.run_dirs, "Evaluated trajectory directories")->required();
  compare_cmd->add_option("--out", o.out, "Directory for comparison.csv (default: .)");

  auto* labels_cmd = app.add_subcommand("labels", "Write tercile labels of a centrality");
  add_dataset_flags(labels_cmd, o);
  labels_cmd->add_option("--out", o.out, "Output directory (default: .)");

  auto* remap_cmd = app.add_subcommand("remap", "Relabel an edge list to dense node ids");
  remap_cmd->add_option("--edges", o.data.edges)->required();
  remap_cmd->add_option("--out", o.out)->required();

  try {
    const auto expanded = expand_config(args);
    std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    fmt::print(err, "usage error: {}\n", e.what());
    return kExitUsage;
  }

  try {
    if (!(o.delta > 0.0 && o.delta <= 1.0)) throw UsageError("--delta must lie in (0, 1]");
    if (*prune_cmd) return cmd_prune(o, out, err);
    if (*eval_cmd) return cmd_eval(o, *eval_cmd, out, err);
    if (*compare_cmd) return cmd_compare(o, out, err);
    if (*labels_cmd) return cmd_labels(o, out);
    if (*remap_cmd) return cmd_remap(o, out);
  } catch (const UsageError& e) {
    fmt::print(err, "usage error: {}\n", e.what());
    return kExitUsage;
  } catch (const DivergenceError& e) {
    fmt::print(err, "numeric divergence: {}\n", e.what());
    return kExitDivergence;
  } catch (const ConvergenceError& e) {
    fmt::print(err, "numeric divergence: {}\n", e.what());
    return kExitDivergence;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace igprune::cli
