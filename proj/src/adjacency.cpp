#include "ssip/adjacency.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ssip {

AdjacencyGraph::AdjacencyGraph(std::vector<std::vector<int>> neighbors) : neighbors_(std::move(neighbors)) {
  for (std::size_t i = 0; i < neighbors_.size(); ++i) {
    if (neighbors_[i].empty()) {
      throw std::invalid_argument("AdjacencyGraph: region " + std::to_string(i) + " is isolated");
    }
    std::sort(neighbors_[i].begin(), neighbors_[i].end());
  }
}

AdjacencyGraph AdjacencyGraph::grid(int rows, int cols) {
  if (rows < 1 || cols < 1 || rows * cols < 2) {
    throw std::invalid_argument("grid: need rows*cols >= 2");
  }
  std::vector<std::vector<int>> nbrs(static_cast<std::size_t>(rows) * cols);
  auto id = [cols](int r, int c) { return r * cols + c; };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      auto& v = nbrs[id(r, c)];
      if (r > 0) v.push_back(id(r - 1, c));
      if (r + 1 < rows) v.push_back(id(r + 1, c));
      if (c > 0) v.push_back(id(r, c - 1));
      if (c + 1 < cols) v.push_back(id(r, c + 1));
    }
  }
  return AdjacencyGraph(std::move(nbrs));
}

AdjacencyGraph AdjacencyGraph::from_edges(int n_regions, const std::vector<std::pair<int, int>>& edges) {
  if (n_regions < 2) throw std::invalid_argument("from_edges: need at least 2 regions");
  std::set<std::pair<int, int>> seen;
  std::vector<std::vector<int>> nbrs(static_cast<std::size_t>(n_regions));
  for (auto [i, k] : edges) {
    if (i < 0 || k < 0 || i >= n_regions || k >= n_regions) {
      throw std::invalid_argument("from_edges: index out of range");
    }
    if (i == k) throw std::invalid_argument("from_edges: self-loop at region " + std::to_string(i));
    auto key = std::minmax(i, k);
    if (!seen.insert(key).second) {
      throw std::invalid_argument("from_edges: duplicate edge");
    }
    nbrs[i].push_back(k);
    nbrs[k].push_back(i);
  }
  return AdjacencyGraph(std::move(nbrs));
}

AdjacencyGraph AdjacencyGraph::from_edge_list_file(const std::string& path, int n_regions) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list: " + path);
  std::vector<std::pair<int, int>> edges;
  int max_idx = -1;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    long i, k;
    if (!(ls >> i)) continue;  // blank line
    if (!(ls >> k)) throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected 'i k' pair");
    edges.emplace_back(static_cast<int>(i), static_cast<int>(k));
    max_idx = std::max(max_idx, static_cast<int>(std::max(i, k)));
  }
  const int n = n_regions > 0 ? n_regions : max_idx + 1;
  return from_edges(n, edges);
}

int AdjacencyGraph::n_edges() const {
  int deg_sum = 0;
  for (const auto& v : neighbors_) deg_sum += static_cast<int>(v.size());
  return deg_sum / 2;
}

int AdjacencyGraph::n_components() const {
  const int n = n_regions();
  std::vector<int> comp(n, -1);
  int n_comp = 0;
  std::vector<int> stack;
  for (int s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    stack.push_back(s);
    comp[s] = n_comp;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int w : neighbors_[v]) {
        if (comp[w] < 0) {
          comp[w] = n_comp;
          stack.push_back(w);
        }
      }
    }
    ++n_comp;
  }
  return n_comp;
}

Eigen::SparseMatrix<double> car_precision(const AdjacencyGraph& graph, double rho) {
  if (rho < 0.0 || rho > 1.0) throw std::invalid_argument("car_precision: rho must be in [0,1]");
  const int n = graph.n_regions();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(n) + 2 * graph.n_edges());
  for (int i = 0; i < n; ++i) {
    trips.emplace_back(i, i, static_cast<double>(graph.degree(i)));
    if (rho != 0.0) {
      for (int k : graph.neighbors(i)) trips.emplace_back(i, k, -rho);
    }
  }
  Eigen::SparseMatrix<double> q(n, n);
  q.setFromTriplets(trips.begin(), trips.end());
  return q;
}

double neighbor_sum(std::span<const double> field, const AdjacencyGraph& graph, int i) {
  if (static_cast<int>(field.size()) != graph.n_regions()) {
    throw std::invalid_argument("neighbor_sum: field length must equal n_regions");
  }
  double s = 0.0;
  for (int k : graph.neighbors(i)) s += field[static_cast<std::size_t>(k)];
  return s;
}

}  // namespace ssip
