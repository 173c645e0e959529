#pragma once

// Two-layer graph convolutional classifier trained full-batch, with
// backpropagation through the symmetric normalization so the validation loss
// can be differentiated with respect to each raw edge weight.
//
//   logits = Â · ReLU(Â · X · W1 + b1) · W2 + b2,   Â = D̃^{-1/2} (A + I) D̃^{-1/2}
//
// The per-edge derivative dL/dw_e is what the gradient pruning mode consumes.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "igprune/graph.hpp"

namespace igprune {

struct TrainConfig {
  std::size_t hidden_dim = 128;
  double learning_rate = 1e-2;
  double weight_decay = 5e-4;
  std::size_t epochs = 200;
  std::uint64_t seed = 42;

  void validate() const;
};

struct PredictorModel {
  Eigen::MatrixXd w1;  // feature_dim x hidden_dim
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;  // hidden_dim x num_classes
  Eigen::VectorXd b2;

  std::size_t feature_dim() const { return static_cast<std::size_t>(w1.rows()); }
  std::size_t hidden_dim() const { return static_cast<std::size_t>(w1.cols()); }
  std::size_t num_classes() const { return static_cast<std::size_t>(w2.cols()); }

  // Zero parameters of the given shape.
  static PredictorModel zeros(std::size_t feature_dim, std::size_t hidden_dim,
                              std::size_t num_classes);

  friend bool operator==(const PredictorModel& a, const PredictorModel& b);
};

// Sparse symmetric Â restricted to the active edges, one row per node. The
// diagonal (self-loop) entry of each row is stored separately.
class NormalizedAdjacency {
 public:
  struct Entry {
    NodeId col;
    EdgeId edge;
    double value;
  };

  std::size_t size() const noexcept { return diagonal_.size(); }
  const std::vector<Entry>& row(NodeId i) const { return rows_[i]; }
  double diagonal(NodeId i) const { return diagonal_[i]; }
  // D̃_ii = 1 + sum of active incident weights.
  double degree(NodeId i) const { return degree_[i]; }

  double entry(NodeId i, NodeId j) const;
  Eigen::MatrixXd to_dense() const;

  // Â · h
  Eigen::MatrixXd apply(const Eigen::MatrixXd& h) const;

 private:
  friend NormalizedAdjacency normalize_adjacency(const Graph&, const EdgeSubset&);

  std::vector<std::vector<Entry>> rows_;
  std::vector<double> diagonal_;
  std::vector<double> degree_;
};

NormalizedAdjacency normalize_adjacency(const Graph& g, const EdgeSubset& active);

// Row-wise log-softmax class probabilities, n x C.
Eigen::MatrixXd forward(const PredictorModel& m, const Graph& g, const EdgeSubset& active);

// Full-batch Adam on mean train-mask NLL with decoupled weight decay on W1/W2.
// Throws DivergenceError when the loss becomes non-finite. If `losses` is
// given it receives the training loss of every epoch.
PredictorModel train(const Graph& g, const EdgeSubset& active, const Task& task,
                     const TrainConfig& cfg, std::vector<double>* losses = nullptr);

// Mean natural-log NLL over the nodes of `split`.
double nll(const PredictorModel& m, const Graph& g, const EdgeSubset& active, const Task& task,
           Split split);

double accuracy(const PredictorModel& m, const Graph& g, const EdgeSubset& active,
                const Task& task, Split split);

struct EdgeValue {
  EdgeId edge;
  double value;
};

// dL_val/dw_e for every active edge (ascending id), where w_e is the raw
// symmetric weight before normalization.
std::vector<EdgeValue> adjacency_gradient(const PredictorModel& m, const Graph& g,
                                          const EdgeSubset& active, const Task& task);

// Pieces of the forward pass shared by the scorers: X·W1 does not depend on
// the adjacency, so it is computed once per trained model.
Eigen::MatrixXd project_features(const PredictorModel& m, const Graph& g);
Eigen::MatrixXd log_probs_from_projection(const PredictorModel& m, const NormalizedAdjacency& adj,
                                          const Eigen::MatrixXd& projected);
double mean_nll(const Eigen::MatrixXd& log_probs, const Task& task, Split split);

// Checkpoint: JSON with magic "igprune-gcn", version 1, shapes and row-major
// parameter arrays.
void save_model(const PredictorModel& m, const std::filesystem::path& path);
PredictorModel load_model(const std::filesystem::path& path);

}  // namespace igprune
