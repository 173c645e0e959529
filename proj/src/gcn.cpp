#include "igprune/gcn.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <json.hpp>

#include "igprune/error.hpp"
#include "igprune/rng.hpp"

namespace igprune {

void TrainConfig::validate() const {
  if (hidden_dim == 0) throw ValidationError("hidden_dim must be positive");
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
  if (!(weight_decay >= 0.0)) throw ValidationError("weight_decay must be non-negative");
  if (epochs == 0) throw ValidationError("epochs must be >= 1");
}

PredictorModel PredictorModel::zeros(std::size_t feature_dim, std::size_t hidden_dim,
                                     std::size_t num_classes) {
  const auto d = static_cast<Eigen::Index>(feature_dim);
  const auto h = static_cast<Eigen::Index>(hidden_dim);
  const auto c = static_cast<Eigen::Index>(num_classes);
  return {Eigen::MatrixXd::Zero(d, h), Eigen::VectorXd::Zero(h), Eigen::MatrixXd::Zero(h, c),
          Eigen::VectorXd::Zero(c)};
}

bool operator==(const PredictorModel& a, const PredictorModel& b) {
  auto same = [](const auto& x, const auto& y) {
    return x.rows() == y.rows() && x.cols() == y.cols() && (x.array() == y.array()).all();
  };
  return same(a.w1, b.w1) && same(a.b1, b.b1) && same(a.w2, b.w2) && same(a.b2, b.b2);
}

// ---------------------------------------------------------------------------
// Normalization

double NormalizedAdjacency::entry(NodeId i, NodeId j) const {
  if (i == j) return diagonal_.at(i);
  for (const Entry& e : rows_.at(i)) {
    if (e.col == j) return e.value;
  }
  return 0.0;
}

Eigen::MatrixXd NormalizedAdjacency::to_dense() const {
  const auto n = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (NodeId i = 0; i < size(); ++i) {
    out(i, i) = diagonal_[i];
    for (const Entry& e : rows_[i]) out(i, e.col) = e.value;
  }
  return out;
}

Eigen::MatrixXd NormalizedAdjacency::apply(const Eigen::MatrixXd& h) const {
  Eigen::MatrixXd out(h.rows(), h.cols());
  for (NodeId i = 0; i < size(); ++i) {
    out.row(i) = diagonal_[i] * h.row(i);
    for (const Entry& e : rows_[i]) out.row(i) += e.value * h.row(e.col);
  }
  return out;
}

NormalizedAdjacency normalize_adjacency(const Graph& g, const EdgeSubset& active) {
  const std::size_t n = g.num_nodes();
  NormalizedAdjacency adj;
  adj.degree_.assign(n, 1.0);
  for (EdgeId id : active.ids()) {
    const Edge& e = g.edge(id);
    adj.degree_[e.u] += e.weight;
    adj.degree_[e.v] += e.weight;
  }
  adj.diagonal_.resize(n);
  adj.rows_.resize(n);
  for (NodeId i = 0; i < n; ++i) {
    adj.diagonal_[i] = 1.0 / adj.degree_[i];
    for (const auto& inc : g.incident(i)) {
      if (!active.contains(inc.edge)) continue;
      const double w = g.edge(inc.edge).weight;
      adj.rows_[i].push_back(
          {inc.neighbor, inc.edge, w / std::sqrt(adj.degree_[i] * adj.degree_[inc.neighbor])});
    }
  }
  return adj;
}

// ---------------------------------------------------------------------------
// Forward pass

namespace {

void check_shapes(const PredictorModel& m, const Graph& g) {
  if (m.feature_dim() != g.feature_dim()) {
    throw ShapeError(fmt::format("model expects {} features, graph has {}", m.feature_dim(),
                                 g.feature_dim()));
  }
  if (m.b1.size() != m.w1.cols() || m.w2.rows() != m.w1.cols() || m.b2.size() != m.w2.cols()) {
    throw ShapeError("inconsistent model parameter shapes");
  }
}

void check_task(const PredictorModel& m, const Graph& g, const Task& task) {
  if (task.labels.size() != g.num_nodes()) {
    throw ShapeError(fmt::format("{} labels for {} nodes", task.labels.size(), g.num_nodes()));
  }
  if (static_cast<std::size_t>(task.num_classes) != m.num_classes()) {
    throw ShapeError(fmt::format("model has {} classes, task has {}", m.num_classes(),
                                 task.num_classes));
  }
}

void log_softmax_rows(Eigen::MatrixXd& z) {
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double mx = z.row(i).maxCoeff();
    const double lse = mx + std::log((z.row(i).array() - mx).exp().sum());
    z.row(i).array() -= lse;
  }
}

struct Activations {
  Eigen::MatrixXd projected;  // X W1
  Eigen::MatrixXd pre1;       // Â X W1 + b1
  Eigen::MatrixXd hidden;     // ReLU(pre1)
  Eigen::MatrixXd hidden_w2;  // hidden W2
  Eigen::MatrixXd log_probs;
};

Activations run_forward(const PredictorModel& m, const NormalizedAdjacency& adj,
                        Eigen::MatrixXd projected) {
  Activations a;
  a.projected = std::move(projected);
  a.pre1 = adj.apply(a.projected);
  a.pre1.rowwise() += m.b1.transpose();
  a.hidden = a.pre1.cwiseMax(0.0);
  a.hidden_w2 = a.hidden * m.w2;
  a.log_probs = adj.apply(a.hidden_w2);
  a.log_probs.rowwise() += m.b2.transpose();
  log_softmax_rows(a.log_probs);
  return a;
}

// dL/dlogits for mean NLL over `nodes`.
Eigen::MatrixXd output_gradient(const Eigen::MatrixXd& log_probs, const Task& task,
                                const std::vector<NodeId>& nodes) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(log_probs.rows(), log_probs.cols());
  const double scale = 1.0 / static_cast<double>(nodes.size());
  for (NodeId i : nodes) {
    d.row(i) = log_probs.row(i).array().exp() * scale;
    d(i, task.labels[i]) -= scale;
  }
  return d;
}

struct Gradients {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;
  Eigen::VectorXd b2;
  Eigen::MatrixXd d_pre2;  // dL/d(Â H W2 + b2)
  Eigen::MatrixXd d_pre1;  // dL/d(Â X W1 + b1)
};

Gradients backward(const PredictorModel& m, const Graph& g, const NormalizedAdjacency& adj,
                   const Activations& a, const Task& task, const std::vector<NodeId>& nodes,
                   bool want_params) {
  Gradients grad;
  grad.d_pre2 = output_gradient(a.log_probs, task, nodes);
  // Â is symmetric, so Âᵀ·d = Â·d.
  Eigen::MatrixXd d_hidden_w2 = adj.apply(grad.d_pre2);
  Eigen::MatrixXd d_hidden = d_hidden_w2 * m.w2.transpose();
  grad.d_pre1 = d_hidden.cwiseProduct((a.pre1.array() > 0.0).cast<double>().matrix());
  if (want_params) {
    grad.b2 = grad.d_pre2.colwise().sum().transpose();
    grad.w2 = a.hidden.transpose() * d_hidden_w2;
    grad.b1 = grad.d_pre1.colwise().sum().transpose();
    grad.w1 = g.features().transpose() * adj.apply(grad.d_pre1);
  }
  return grad;
}

}  // namespace

Eigen::MatrixXd project_features(const PredictorModel& m, const Graph& g) {
  check_shapes(m, g);
  return g.features() * m.w1;
}

Eigen::MatrixXd log_probs_from_projection(const PredictorModel& m, const NormalizedAdjacency& adj,
                                          const Eigen::MatrixXd& projected) {
  return run_forward(m, adj, projected).log_probs;
}

Eigen::MatrixXd forward(const PredictorModel& m, const Graph& g, const EdgeSubset& active) {
  return log_probs_from_projection(m, normalize_adjacency(g, active), project_features(m, g));
}

double mean_nll(const Eigen::MatrixXd& log_probs, const Task& task, Split split) {
  const auto& nodes = task.nodes(split);
  if (nodes.empty()) throw ValidationError("NLL over an empty mask");
  double sum = 0.0;
  for (NodeId i : nodes) sum -= log_probs(i, task.labels[i]);
  return sum / static_cast<double>(nodes.size());
}

double nll(const PredictorModel& m, const Graph& g, const EdgeSubset& active, const Task& task,
           Split split) {
  check_task(m, g, task);
  return mean_nll(forward(m, g, active), task, split);
}

double accuracy(const PredictorModel& m, const Graph& g, const EdgeSubset& active,
                const Task& task, Split split) {
  check_task(m, g, task);
  const auto& nodes = task.nodes(split);
  if (nodes.empty()) throw ValidationError("accuracy over an empty mask");
  auto lp = forward(m, g, active);
  std::size_t hits = 0;
  for (NodeId i : nodes) {
    Eigen::Index best = 0;
    lp.row(i).maxCoeff(&best);
    hits += (best == task.labels[i]);
  }
  return static_cast<double>(hits) / static_cast<double>(nodes.size());
}

// ---------------------------------------------------------------------------
// Training

namespace {

Eigen::MatrixXd glorot(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Eigen::MatrixXd w(rows, cols);
  // Row-major fill order so the draw sequence is independent of storage order.
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) w(r, c) = rng.uniform(-limit, limit);
  }
  return w;
}

template <typename Param>
struct AdamSlot {
  Param m;
  Param v;

  explicit AdamSlot(const Param& like)
      : m(Param::Zero(like.rows(), like.cols())), v(Param::Zero(like.rows(), like.cols())) {}

  void step(Param& p, const Param& g, double lr, double decay, double bc1, double bc2) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    m = beta1 * m + (1.0 - beta1) * g;
    v = beta2 * v + (1.0 - beta2) * g.cwiseProduct(g);
    if (decay > 0.0) p *= (1.0 - lr * decay);
    p.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps);
  }
};

}  // namespace

PredictorModel train(const Graph& g, const EdgeSubset& active, const Task& task,
                     const TrainConfig& cfg, std::vector<double>* losses) {
  cfg.validate();
  task.validate(g.num_nodes());
  Rng rng(cfg.seed);
  const auto d = static_cast<Eigen::Index>(g.feature_dim());
  const auto h = static_cast<Eigen::Index>(cfg.hidden_dim);
  const auto c = static_cast<Eigen::Index>(task.num_classes);
  PredictorModel m;
  m.w1 = glorot(rng, d, h);
  m.b1 = Eigen::VectorXd::Zero(h);
  m.w2 = glorot(rng, h, c);
  m.b2 = Eigen::VectorXd::Zero(c);

  const auto adj = normalize_adjacency(g, active);
  AdamSlot<Eigen::MatrixXd> s_w1(m.w1), s_w2(m.w2);
  AdamSlot<Eigen::VectorXd> s_b1(m.b1), s_b2(m.b2);
  if (losses) losses->clear();

  double bc1 = 1.0, bc2 = 1.0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    auto act = run_forward(m, adj, g.features() * m.w1);
    const double loss = mean_nll(act.log_probs, task, Split::train);
    if (!std::isfinite(loss)) throw DivergenceError("training loss is not finite", epoch);
    if (losses) losses->push_back(loss);

    auto grad = backward(m, g, adj, act, task, task.train, true);
    bc1 *= 0.9;
    bc2 *= 0.999;
    const double lr = cfg.learning_rate, wd = cfg.weight_decay;
    s_w1.step(m.w1, grad.w1, lr, wd, 1.0 - bc1, 1.0 - bc2);
    s_b1.step(m.b1, grad.b1, lr, 0.0, 1.0 - bc1, 1.0 - bc2);
    s_w2.step(m.w2, grad.w2, lr, wd, 1.0 - bc1, 1.0 - bc2);
    s_b2.step(m.b2, grad.b2, lr, 0.0, 1.0 - bc1, 1.0 - bc2);
    if (!m.w1.allFinite() || !m.w2.allFinite()) {
      throw DivergenceError("parameters became non-finite", epoch);
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Edge-weight gradient

std::vector<EdgeValue> adjacency_gradient(const PredictorModel& m, const Graph& g,
                                          const EdgeSubset& active, const Task& task) {
  check_task(m, g, task);
  const auto adj = normalize_adjacency(g, active);
  auto act = run_forward(m, adj, project_features(m, g));
  auto grad = backward(m, g, adj, act, task, task.val, false);

  // dL/dÂ_ij = d_pre2[i]·(H W2)[j] + d_pre1[i]·(X W1)[j]
  auto dA = [&](NodeId i, NodeId j) {
    return grad.d_pre2.row(i).dot(act.hidden_w2.row(j)) +
           grad.d_pre1.row(i).dot(act.projected.row(j));
  };

  // Each Â_kj depends on D̃_kk through D̃_kk^{-1/2}; collect dL/dD̃_kk.
  const std::size_t n = g.num_nodes();
  std::vector<double> d_degree(n);
  for (NodeId k = 0; k < n; ++k) {
    double s = 2.0 * dA(k, k) * adj.diagonal(k);
    for (const auto& e : adj.row(k)) s += (dA(k, e.col) + dA(e.col, k)) * e.value;
    d_degree[k] = -s / (2.0 * adj.degree(k));
  }

  std::vector<EdgeValue> out;
  out.reserve(active.count());
  for (EdgeId id : active.ids()) {
    const Edge& e = g.edge(id);
    const double direct =
        (dA(e.u, e.v) + dA(e.v, e.u)) / std::sqrt(adj.degree(e.u) * adj.degree(e.v));
    out.push_back({id, direct + d_degree[e.u] + d_degree[e.v]});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr const char* kModelMagic = "igprune-gcn";
constexpr int kModelVersion = 1;

nlohmann::json matrix_json(const Eigen::MatrixXd& x) {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(x.size()));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) flat.push_back(x(r, c));
  }
  return {{"shape", {x.rows(), x.cols()}}, {"data", flat}};
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("shape").at(0).get<Eigen::Index>();
  const auto cols = j.at("shape").at(1).get<Eigen::Index>();
  auto flat = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(flat.size()) != rows * cols) {
    throw ShapeError("checkpoint array size does not match its shape");
  }
  Eigen::MatrixXd x(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) x(r, c) = flat[static_cast<std::size_t>(r * cols + c)];
  }
  return x;
}

}  // namespace

void save_model(const PredictorModel& m, const std::filesystem::path& path) {
  nlohmann::json j = {{"magic", kModelMagic},
                      {"version", kModelVersion},
                      {"w1", matrix_json(m.w1)},
                      {"b1", matrix_json(m.b1)},
                      {"w2", matrix_json(m.w2)},
                      {"b2", matrix_json(m.b2)}};
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump() << '\n';
}

PredictorModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  try {
    nlohmann::json j;
    in >> j;
    if (j.at("magic") != kModelMagic) throw ParseError(path.string(), 0, "not a model checkpoint");
    if (j.at("version") != kModelVersion) {
      throw ParseError(path.string(), 0, "unsupported checkpoint version");
    }
    PredictorModel m;
    m.w1 = matrix_from_json(j.at("w1"));
    m.b1 = matrix_from_json(j.at("b1"));
    m.w2 = matrix_from_json(j.at("w2"));
    m.b2 = matrix_from_json(j.at("b2"));
    if (m.b1.size() != m.w1.cols() || m.w2.rows() != m.w1.cols() || m.b2.size() != m.w2.cols()) {
      throw ShapeError("inconsistent checkpoint shapes");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string(), 0, e.what());
  }
}

}  // namespace igprune
