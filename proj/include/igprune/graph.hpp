#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace igprune {

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;

struct Edge {
  NodeId u;  // u < v
  NodeId v;
  double weight;
  EdgeId id;
};

// Set of edge ids of a parent Graph, stored as a bitmask over 0..universe-1.
// Represents one pruning state without copying the edge list.
class EdgeSubset {
 public:
  EdgeSubset() = default;

  static EdgeSubset all(std::size_t universe);
  static EdgeSubset none(std::size_t universe);
  static EdgeSubset of(std::size_t universe, std::span<const EdgeId> ids);

  std::size_t universe() const noexcept { return universe_; }
  std::size_t count() const noexcept { return count_; }
  bool empty() const noexcept { return count_ == 0; }

  bool contains(EdgeId id) const;
  void insert(EdgeId id);
  void erase(EdgeId id);

  // Ascending edge ids.
  std::vector<EdgeId> ids() const;

  bool is_subset_of(const EdgeSubset& other) const;

  friend bool operator==(const EdgeSubset&, const EdgeSubset&) = default;

 private:
  void check(EdgeId id) const;

  std::size_t universe_ = 0;
  std::size_t count_ = 0;
  std::vector<std::uint64_t> bits_;
};

// Undirected weighted graph with node features. Edge ids are dense and stable
// for the lifetime of the value; pruning states are EdgeSubsets over them.
// Immutable after construction.
class Graph {
 public:
  struct Incidence {
    NodeId neighbor;
    EdgeId edge;
  };

  Graph() = default;

  // `edges` may arrive in any orientation; each is stored with u < v and
  // receives its position as id. Throws ValidationError on self-loops,
  // duplicates or non-positive weights, IndexError on out-of-range nodes.
  Graph(std::size_t num_nodes, std::vector<Edge> edges, Eigen::MatrixXd features);

  // Convenience for tests and built-in data: unit weights, identity features
  // unless given.
  static Graph from_pairs(std::size_t num_nodes,
                          std::span<const std::pair<NodeId, NodeId>> pairs,
                          std::optional<Eigen::MatrixXd> features = std::nullopt);

  std::size_t num_nodes() const noexcept { return num_nodes_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  std::size_t feature_dim() const noexcept { return static_cast<std::size_t>(features_.cols()); }

  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const Edge& edge(EdgeId id) const;
  const Eigen::MatrixXd& features() const noexcept { return features_; }

  // Incident edges of `node`, sorted by neighbor id.
  std::span<const Incidence> incident(NodeId node) const;

  std::optional<EdgeId> find_edge(NodeId a, NodeId b) const;

  EdgeSubset all_edges() const { return EdgeSubset::all(edges_.size()); }

 private:
  std::size_t num_nodes_ = 0;
  std::vector<Edge> edges_;
  Eigen::MatrixXd features_;
  std::vector<std::size_t> offsets_;
  std::vector<Incidence> incidence_;
};

enum class Split { train, val, test };

// Node classification target with disjoint, non-empty index splits.
struct Task {
  std::vector<int> labels;
  int num_classes = 0;
  std::vector<NodeId> train;
  std::vector<NodeId> val;
  std::vector<NodeId> test;

  const std::vector<NodeId>& nodes(Split s) const;
  std::vector<int> labels_on(Split s) const;

  // Throws ValidationError if labels are out of range, masks overlap or a
  // mask is empty.
  void validate(std::size_t num_nodes) const;
};

struct SplitMasks {
  std::vector<NodeId> train;
  std::vector<NodeId> val;
  std::vector<NodeId> test;
};

// Seeded 60/20/20 split: train = floor(0.6n), val = floor(0.2n), test gets the
// remainder. Index lists are sorted ascending.
SplitMasks gen_split(std::size_t num_nodes, std::uint64_t seed);

Task make_task(std::vector<int> labels, SplitMasks split);

struct LoadOptions {
  // Sum weights of repeated undirected pairs instead of rejecting conflicts.
  bool merge_sum = false;
};

// Edge list "u<TAB>v[<TAB>w]" with '#' comments; features are comma-separated
// rows, one per node, and fix the node count.
Graph load_graph(const std::filesystem::path& edge_list,
                 const std::filesystem::path& features,
                 LoadOptions options = {});

// Same, with identity features of size num_nodes.
Graph load_graph(const std::filesystem::path& edge_list, std::size_t num_nodes,
                 LoadOptions options = {});

// Raw rows of an edge list (orientation as written, ids unset).
std::vector<Edge> load_edge_rows(const std::filesystem::path& edge_list);

void save_edge_list(const Graph& g, const EdgeSubset& active,
                    const std::filesystem::path& path);
void save_features(const Graph& g, const std::filesystem::path& path);

std::vector<int> load_labels(const std::filesystem::path& path);
void save_labels(std::span<const int> labels, const std::filesystem::path& path);

SplitMasks load_splits(const std::filesystem::path& path);
void save_splits(const SplitMasks& split, const std::filesystem::path& path);

// Zachary's karate club with identity features and the 4-community labels,
// split by gen_split(34, split_seed).
std::pair<Graph, Task> builtin_karate(std::uint64_t split_seed = 42);

// Shrinks `active` by `doomed`. Throws IndexError if doomed holds an id
// outside the active set.
EdgeSubset remove_edges(const Graph& g, const EdgeSubset& active, const EdgeSubset& doomed);

// Component label per node (labels are 0.. in order of first node).
std::vector<std::uint32_t> connected_components(const Graph& g, const EdgeSubset& active);
std::size_t count_components(const Graph& g, const EdgeSubset& active);

// Maps sparse external ids in an edge list to dense 0-based ids, in order of
// first appearance. Returns the id table (dense -> external).
std::vector<std::string> remap_edge_list(const std::filesystem::path& in,
                                         const std::filesystem::path& out);

}  // namespace igprune
