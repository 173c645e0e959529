#pragma once

// Command-line front end. `run` is the whole program minus argv handling, so
// tests can drive commands in-process.
//
//   igprune prune   --builtin karate --method igprune-exact --steps 10 --out DIR
//   igprune eval    DIR [--reps 5] [--delta 0.8]
//   igprune compare DIR... [--out DIR]
//   igprune labels  --builtin karate --task pagerank --out DIR
//   igprune remap   --edges IN --out OUT
//
// Exit codes: 0 ok, 2 usage, 3 data, 4 numeric divergence.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "igprune/graph.hpp"

namespace igprune::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitDivergence = 4;

// Where the graph and task come from. Serialized into every manifest so `eval`
// can rebuild the exact dataset from the trajectory directory alone.
struct DatasetSpec {
  std::string builtin;
  std::string edges;
  std::string features;
  std::string labels;
  std::string splits;
  bool merge_sum = false;
  std::string task = "original";
  std::uint64_t split_seed = 42;

  nlohmann::ordered_json to_json() const;
  static DatasetSpec from_json(const nlohmann::json& j);
};

struct Dataset {
  Graph graph;
  Task task;
};

Dataset load_dataset(const DatasetSpec& spec);

// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace igprune::cli
