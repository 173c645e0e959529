#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "igprune/graph.hpp"
#include "igprune/rng.hpp"

namespace igprune::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "igprune-XXXXXX").string();
    if (mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

// Uniformly drawn simple graph with `m` distinct edges and uniform(-1, 1)
// features of width `dim`.
inline Graph random_graph(std::size_t n, std::size_t m, std::uint64_t seed, std::size_t dim = 4,
                          bool random_weights = false) {
  Rng rng(seed);
  std::set<std::pair<NodeId, NodeId>> seen;
  std::vector<Edge> edges;
  while (edges.size() < m) {
    auto a = static_cast<NodeId>(rng.below(n));
    auto b = static_cast<NodeId>(rng.below(n));
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (!seen.insert({a, b}).second) continue;
    edges.push_back({a, b, random_weights ? rng.uniform(0.5, 2.0) : 1.0, 0});
  }
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rng.uniform(-1.0, 1.0);
  }
  return Graph(n, std::move(edges), std::move(x));
}

inline Task random_task(std::size_t n, int classes, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % static_cast<std::size_t>(classes));
  rng.shuffle(std::span<int>(labels));
  return make_task(std::move(labels), gen_split(n, seed));
}

inline Graph path_graph(std::size_t n) {
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (NodeId i = 0; i + 1 < n; ++i) pairs.emplace_back(i, i + 1);
  return Graph::from_pairs(n, pairs);
}

inline Graph star_graph(std::size_t leaves) {
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (NodeId i = 1; i <= leaves; ++i) pairs.emplace_back(0, i);
  return Graph::from_pairs(leaves + 1, pairs);
}

inline Graph complete_graph(std::size_t n) {
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  return Graph::from_pairs(n, pairs);
}

}  // namespace igprune::testing
