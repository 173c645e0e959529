#include "igprune/graph.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>
#include <fmt/os.h>
#include <json.hpp>

#include "igprune/error.hpp"
#include "igprune/rng.hpp"

namespace igprune {

// ---------------------------------------------------------------------------
// EdgeSubset

EdgeSubset EdgeSubset::none(std::size_t universe) {
  EdgeSubset s;
  s.universe_ = universe;
  s.bits_.assign((universe + 63) / 64, 0);
  return s;
}

EdgeSubset EdgeSubset::all(std::size_t universe) {
  EdgeSubset s = none(universe);
  for (std::size_t w = 0; w < s.bits_.size(); ++w) s.bits_[w] = ~std::uint64_t{0};
  if (universe % 64 != 0) s.bits_.back() = (std::uint64_t{1} << (universe % 64)) - 1;
  s.count_ = universe;
  return s;
}

EdgeSubset EdgeSubset::of(std::size_t universe, std::span<const EdgeId> ids) {
  EdgeSubset s = none(universe);
  for (EdgeId id : ids) s.insert(id);
  return s;
}

void EdgeSubset::check(EdgeId id) const {
  if (id >= universe_) {
    throw IndexError(fmt::format("edge id {} outside [0, {})", id, universe_));
  }
}

bool EdgeSubset::contains(EdgeId id) const {
  check(id);
  return (bits_[id / 64] >> (id % 64)) & 1u;
}

void EdgeSubset::insert(EdgeId id) {
  check(id);
  auto& word = bits_[id / 64];
  const auto mask = std::uint64_t{1} << (id % 64);
  if (!(word & mask)) {
    word |= mask;
    ++count_;
  }
}

void EdgeSubset::erase(EdgeId id) {
  check(id);
  auto& word = bits_[id / 64];
  const auto mask = std::uint64_t{1} << (id % 64);
  if (word & mask) {
    word &= ~mask;
    --count_;
  }
}

std::vector<EdgeId> EdgeSubset::ids() const {
  std::vector<EdgeId> out;
  out.reserve(count_);
  for (std::size_t w = 0; w < bits_.size(); ++w) {
    std::uint64_t word = bits_[w];
    while (word) {
      const int bit = std::countr_zero(word);
      out.push_back(static_cast<EdgeId>(w * 64 + bit));
      word &= word - 1;
    }
  }
  return out;
}

bool EdgeSubset::is_subset_of(const EdgeSubset& other) const {
  if (universe_ != other.universe_) return false;
  for (std::size_t w = 0; w < bits_.size(); ++w) {
    if (bits_[w] & ~other.bits_[w]) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Graph

Graph::Graph(std::size_t num_nodes, std::vector<Edge> edges, Eigen::MatrixXd features)
    : num_nodes_(num_nodes), edges_(std::move(edges)), features_(std::move(features)) {
  if (static_cast<std::size_t>(features_.rows()) != num_nodes_) {
    throw ShapeError(fmt::format("feature matrix has {} rows, expected {}", features_.rows(),
                                 num_nodes_));
  }
  if (!features_.allFinite()) throw ValidationError("feature matrix has non-finite entries");

  std::vector<std::size_t> degree(num_nodes_, 0);
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    Edge& e = edges_[i];
    if (e.u >= num_nodes_ || e.v >= num_nodes_) {
      throw IndexError(fmt::format("edge ({}, {}) references a node >= {}", e.u, e.v, num_nodes_));
    }
    if (e.u == e.v) throw ValidationError(fmt::format("self-loop on node {}", e.u));
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      throw ValidationError(fmt::format("edge ({}, {}) has non-positive weight", e.u, e.v));
    }
    if (e.u > e.v) std::swap(e.u, e.v);
    e.id = static_cast<EdgeId>(i);
    ++degree[e.u];
    ++degree[e.v];
  }

  offsets_.assign(num_nodes_ + 1, 0);
  for (std::size_t n = 0; n < num_nodes_; ++n) offsets_[n + 1] = offsets_[n] + degree[n];
  incidence_.resize(offsets_.back());
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (const Edge& e : edges_) {
    incidence_[fill[e.u]++] = {e.v, e.id};
    incidence_[fill[e.v]++] = {e.u, e.id};
  }
  for (std::size_t n = 0; n < num_nodes_; ++n) {
    auto first = incidence_.begin() + static_cast<std::ptrdiff_t>(offsets_[n]);
    auto last = incidence_.begin() + static_cast<std::ptrdiff_t>(offsets_[n + 1]);
    std::sort(first, last, [](const Incidence& a, const Incidence& b) {
      return a.neighbor < b.neighbor;
    });
    auto dup = std::adjacent_find(first, last, [](const Incidence& a, const Incidence& b) {
      return a.neighbor == b.neighbor;
    });
    if (dup != last) {
      throw ValidationError(fmt::format("duplicate edge ({}, {})", n, dup->neighbor));
    }
  }
}

Graph Graph::from_pairs(std::size_t num_nodes, std::span<const std::pair<NodeId, NodeId>> pairs,
                        std::optional<Eigen::MatrixXd> features) {
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (auto [u, v] : pairs) edges.push_back({u, v, 1.0, 0});
  auto x = features ? std::move(*features)
                    : Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(num_nodes),
                                                static_cast<Eigen::Index>(num_nodes));
  return Graph(num_nodes, std::move(edges), std::move(x));
}

const Edge& Graph::edge(EdgeId id) const {
  if (id >= edges_.size()) throw IndexError(fmt::format("unknown edge id {}", id));
  return edges_[id];
}

std::span<const Graph::Incidence> Graph::incident(NodeId node) const {
  if (node >= num_nodes_) throw IndexError(fmt::format("unknown node {}", node));
  return {incidence_.data() + offsets_[node], offsets_[node + 1] - offsets_[node]};
}

std::optional<EdgeId> Graph::find_edge(NodeId a, NodeId b) const {
  if (a >= num_nodes_ || b >= num_nodes_) return std::nullopt;
  auto inc = incident(a);
  auto it = std::lower_bound(inc.begin(), inc.end(), b, [](const Incidence& x, NodeId key) {
    return x.neighbor < key;
  });
  if (it != inc.end() && it->neighbor == b) return it->edge;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Task and splits

const std::vector<NodeId>& Task::nodes(Split s) const {
  switch (s) {
    case Split::train: return train;
    case Split::val: return val;
    case Split::test: return test;
  }
  return test;
}

std::vector<int> Task::labels_on(Split s) const {
  std::vector<int> out;
  for (NodeId n : nodes(s)) out.push_back(labels.at(n));
  return out;
}

void Task::validate(std::size_t num_nodes) const {
  if (labels.size() != num_nodes) {
    throw ShapeError(fmt::format("{} labels for {} nodes", labels.size(), num_nodes));
  }
  if (num_classes < 1) throw ValidationError("task needs at least one class");
  for (int y : labels) {
    if (y < 0 || y >= num_classes) {
      throw ValidationError(fmt::format("label {} outside [0, {})", y, num_classes));
    }
  }
  std::vector<int> owner(num_nodes, -1);
  const char* names[] = {"train", "val", "test"};
  int which = 0;
  for (Split s : {Split::train, Split::val, Split::test}) {
    const auto& idx = nodes(s);
    if (idx.empty()) throw ValidationError(fmt::format("{} mask is empty", names[which]));
    for (NodeId n : idx) {
      if (n >= num_nodes) throw IndexError(fmt::format("{} mask node {} out of range", names[which], n));
      if (owner[n] != -1) {
        throw ValidationError(fmt::format("node {} is in both {} and {} masks", n, names[owner[n]],
                                          names[which]));
      }
      owner[n] = which;
    }
    ++which;
  }
}

SplitMasks gen_split(std::size_t num_nodes, std::uint64_t seed) {
  if (num_nodes < 5) {
    throw DegenerateError(fmt::format("cannot split {} nodes 60/20/20 (need >= 5)", num_nodes));
  }
  Rng rng(seed);
  auto perm = rng.permutation(num_nodes);
  const std::size_t n_train = num_nodes * 6 / 10;
  const std::size_t n_val = num_nodes * 2 / 10;
  SplitMasks out;
  out.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.val.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train),
                 perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  out.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), perm.end());
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

Task make_task(std::vector<int> labels, SplitMasks split) {
  Task t;
  t.num_classes = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  t.labels = std::move(labels);
  t.train = std::move(split.train);
  t.val = std::move(split.val);
  t.test = std::move(split.test);
  t.validate(t.labels.size());
  return t;
}

// ---------------------------------------------------------------------------
// Text I/O

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line, bool commas) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  auto is_sep = [&](char c) {
    return commas ? c == ',' : (c == '\t' || c == ' ');
  };
  while (i <= line.size()) {
    std::size_t j = i;
    while (j < line.size() && !is_sep(line[j])) ++j;
    auto field = trim(line.substr(i, j - i));
    if (commas || !field.empty()) out.push_back(field);
    i = j + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return in;
}

struct RawEdge {
  NodeId u, v;
  double w;
};

std::vector<RawEdge> read_edge_rows(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<RawEdge> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    auto fields = split_fields(body, false);
    if (fields.size() < 2 || fields.size() > 3) {
      throw ParseError(path.string(), lineno, "expected 'u<TAB>v[<TAB>w]'");
    }
    RawEdge r{0, 0, 1.0};
    if (!parse_number(fields[0], r.u) || !parse_number(fields[1], r.v)) {
      throw ParseError(path.string(), lineno, "node ids must be non-negative integers");
    }
    if (fields.size() == 3 && !parse_number(fields[2], r.w)) {
      throw ParseError(path.string(), lineno, "weight is not a number");
    }
    if (r.u == r.v) {
      throw ValidationError(fmt::format("{}:{}: self-loop on node {}", path.string(), lineno, r.u));
    }
    rows.push_back(r);
  }
  return rows;
}

Graph assemble(const std::filesystem::path& path, std::vector<RawEdge> rows,
               Eigen::MatrixXd features, LoadOptions options) {
  const auto n = static_cast<std::size_t>(features.rows());
  std::map<std::pair<NodeId, NodeId>, std::size_t> seen;
  std::vector<Edge> edges;
  for (const RawEdge& r : rows) {
    if (r.u >= n || r.v >= n) {
      throw IndexError(fmt::format("{}: edge ({}, {}) references a node >= node count {}",
                                   path.string(), r.u, r.v, n));
    }
    auto key = std::minmax(r.u, r.v);
    auto [it, fresh] = seen.emplace(key, edges.size());
    if (fresh) {
      edges.push_back({key.first, key.second, r.w, 0});
    } else if (options.merge_sum) {
      edges[it->second].weight += r.w;
    } else if (edges[it->second].weight != r.w) {
      throw ValidationError(fmt::format("{}: edge ({}, {}) listed with conflicting weights {} and {}",
                                        path.string(), key.first, key.second,
                                        edges[it->second].weight, r.w));
    }
  }
  return Graph(n, std::move(edges), std::move(features));
}

Eigen::MatrixXd read_features(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    auto fields = split_fields(body, true);
    std::vector<double> row(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (!parse_number(fields[i], row[i])) {
        throw ParseError(path.string(), lineno, fmt::format("feature column {} is not a number", i));
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(path.string(), lineno, "ragged feature row");
    }
    rows.push_back(std::move(row));
  }
  const auto dim = rows.empty() ? 0 : rows.front().size();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < dim; ++c) {
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return x;
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

}  // namespace

Graph load_graph(const std::filesystem::path& edge_list, const std::filesystem::path& features,
                 LoadOptions options) {
  auto x = read_features(features);
  return assemble(edge_list, read_edge_rows(edge_list), std::move(x), options);
}

Graph load_graph(const std::filesystem::path& edge_list, std::size_t num_nodes,
                 LoadOptions options) {
  const auto n = static_cast<Eigen::Index>(num_nodes);
  return assemble(edge_list, read_edge_rows(edge_list), Eigen::MatrixXd::Identity(n, n), options);
}

std::vector<Edge> load_edge_rows(const std::filesystem::path& edge_list) {
  std::vector<Edge> out;
  for (const RawEdge& r : read_edge_rows(edge_list)) out.push_back({r.u, r.v, r.w, 0});
  return out;
}

void save_edge_list(const Graph& g, const EdgeSubset& active, const std::filesystem::path& path) {
  auto out = open_output(path);
  for (EdgeId id : active.ids()) {
    const Edge& e = g.edge(id);
    out << fmt::format("{}\t{}\t{}\n", e.u, e.v, e.weight);
  }
}

void save_features(const Graph& g, const std::filesystem::path& path) {
  auto out = open_output(path);
  const auto& x = g.features();
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      out << (c ? "," : "") << fmt::format("{}", x(r, c));
    }
    out << '\n';
  }
}

std::vector<int> load_labels(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<int> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    int y = 0;
    if (!parse_number(body, y) || y < 0) {
      throw ParseError(path.string(), lineno, "label must be a non-negative integer");
    }
    labels.push_back(y);
  }
  return labels;
}

void save_labels(std::span<const int> labels, const std::filesystem::path& path) {
  auto out = open_output(path);
  for (int y : labels) out << y << '\n';
}

SplitMasks load_splits(const std::filesystem::path& path) {
  auto in = open_input(path);
  nlohmann::json j;
  try {
    in >> j;
    SplitMasks s;
    s.train = j.at("train").get<std::vector<NodeId>>();
    s.val = j.at("val").get<std::vector<NodeId>>();
    s.test = j.at("test").get<std::vector<NodeId>>();
    for (auto* v : {&s.train, &s.val, &s.test}) std::sort(v->begin(), v->end());
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string(), 0, e.what());
  }
}

void save_splits(const SplitMasks& split, const std::filesystem::path& path) {
  nlohmann::json j = {{"train", split.train}, {"val", split.val}, {"test", split.test}};
  auto out = open_output(path);
  out << j.dump() << '\n';
}

// ---------------------------------------------------------------------------
// Structure

EdgeSubset remove_edges(const Graph& g, const EdgeSubset& active, const EdgeSubset& doomed) {
  if (active.universe() != g.num_edges() || doomed.universe() != g.num_edges()) {
    throw IndexError("edge subset does not belong to this graph");
  }
  EdgeSubset out = active;
  for (EdgeId id : doomed.ids()) {
    if (!active.contains(id)) {
      throw IndexError(fmt::format("edge id {} is not active", id));
    }
    out.erase(id);
  }
  return out;
}

std::vector<std::uint32_t> connected_components(const Graph& g, const EdgeSubset& active) {
  constexpr auto unset = static_cast<std::uint32_t>(-1);
  std::vector<std::uint32_t> comp(g.num_nodes(), unset);
  std::vector<NodeId> queue;
  std::uint32_t next = 0;
  for (NodeId s = 0; s < g.num_nodes(); ++s) {
    if (comp[s] != unset) continue;
    comp[s] = next;
    queue.assign(1, s);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      for (const auto& inc : g.incident(queue[head])) {
        if (!active.contains(inc.edge) || comp[inc.neighbor] != unset) continue;
        comp[inc.neighbor] = next;
        queue.push_back(inc.neighbor);
      }
    }
    ++next;
  }
  return comp;
}

std::size_t count_components(const Graph& g, const EdgeSubset& active) {
  auto comp = connected_components(g, active);
  return comp.empty() ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
}

std::vector<std::string> remap_edge_list(const std::filesystem::path& in_path,
                                         const std::filesystem::path& out_path) {
  auto in = open_input(in_path);
  std::unordered_map<std::string, NodeId> dense;
  std::vector<std::string> table;
  auto id_of = [&](std::string_view key) {
    auto [it, fresh] = dense.emplace(std::string(key), static_cast<NodeId>(table.size()));
    if (fresh) table.emplace_back(key);
    return it->second;
  };
  std::ostringstream body;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    auto fields = split_fields(text, false);
    if (fields.size() < 2 || fields.size() > 3) {
      throw ParseError(in_path.string(), lineno, "expected 'u<TAB>v[<TAB>w]'");
    }
    const NodeId u = id_of(fields[0]);
    const NodeId v = id_of(fields[1]);
    body << u << '\t' << v;
    if (fields.size() == 3) body << '\t' << fields[2];
    body << '\n';
  }
  auto out = open_output(out_path);
  out << body.str();
  return table;
}

}  // namespace igprune
