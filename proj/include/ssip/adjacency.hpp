#pragma once

#include <Eigen/Sparse>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ssip {

/// Areal neighborhood structure: a symmetric graph over region indices
/// 0..n-1 with no self loops and no isolated regions. Immutable after
/// construction, so it can be read concurrently by any number of chains.
class AdjacencyGraph {
 public:
  /// Rook-adjacency (4-neighbor) grid, regions numbered row-major.
  static AdjacencyGraph grid(int rows, int cols);

  /// Symmetric graph from undirected edges over n regions. Rejects
  /// out-of-range indices, self loops, duplicate edges (after
  /// symmetrization), and isolated regions.
  static AdjacencyGraph from_edges(int n_regions, const std::vector<std::pair<int, int>>& edges);

  /// Plain-text edge list: one "i k" pair per line, '#' starts a comment.
  /// n_regions <= 0 means infer as max index + 1.
  static AdjacencyGraph from_edge_list_file(const std::string& path, int n_regions = -1);

  int n_regions() const { return static_cast<int>(neighbors_.size()); }
  const std::vector<int>& neighbors(int i) const { return neighbors_[i]; }
  int degree(int i) const { return static_cast<int>(neighbors_[i].size()); }
  int n_edges() const;
  int n_components() const;
  bool connected() const { return n_components() == 1; }

 private:
  explicit AdjacencyGraph(std::vector<std::vector<int>> neighbors);
  std::vector<std::vector<int>> neighbors_;
};

/// CAR precision Q = D - rho * W. Symmetric positive definite for rho < 1,
/// positive semidefinite with the per-component constant null space at
/// rho = 1.
Eigen::SparseMatrix<double> car_precision(const AdjacencyGraph& graph, double rho);

/// Sum of field values over the neighbors of region i.
double neighbor_sum(std::span<const double> field, const AdjacencyGraph& graph, int i);

}  // namespace ssip
