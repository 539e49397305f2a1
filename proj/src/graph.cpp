#include "spog/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "spog/error.hpp"

namespace spog {

Graph::Graph(std::size_t n, const std::vector<Edge>& edges) : n_(n), degrees_(n, 0) {
  edges_.reserve(edges.size());
  for (auto [u, v] : edges) {
    if (u >= n || v >= n)
      throw ValidationError("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                            ") has an endpoint out of range for n = " + std::to_string(n));
    if (u == v) throw ValidationError("self-loop on node " + std::to_string(u) + " is not allowed");
    edges_.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  for (auto [u, v] : edges_) {
    ++degrees_[u];
    ++degrees_[v];
  }
}

std::vector<std::size_t> Graph::components() const {
  std::vector<std::size_t> parent(n_);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (auto [u, v] : edges_) {
    const std::size_t ru = find(u), rv = find(v);
    if (ru != rv) parent[std::max(ru, rv)] = std::min(ru, rv);
  }
  std::vector<std::size_t> id(n_);
  std::vector<std::size_t> label_of_root(n_, n_);
  std::size_t next = 0;
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t r = find(i);
    if (label_of_root[r] == n_) label_of_root[r] = next++;
    id[i] = label_of_root[r];
  }
  return id;
}

std::size_t Graph::num_components() const {
  const auto id = components();
  return id.empty() ? 0 : *std::max_element(id.begin(), id.end()) + 1;
}

NormalizedAdjacency normalized_adjacency(const Graph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<std::vector<std::size_t>> nbrs(n);
  for (std::size_t i = 0; i < n; ++i) nbrs[i].push_back(i);
  for (auto [u, v] : g.edges()) {
    nbrs[u].push_back(v);
    nbrs[v].push_back(u);
  }
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(1.0 + static_cast<double>(g.degrees()[i]));

  NormalizedAdjacency a;
  a.rows = a.cols = n;
  a.row_offsets.reserve(n + 1);
  a.row_offsets.push_back(0);
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(nbrs[i].begin(), nbrs[i].end());
    for (std::size_t j : nbrs[i]) {
      a.col_indices.push_back(j);
      a.values.push_back(inv_sqrt[i] * inv_sqrt[j]);
    }
    a.row_offsets.push_back(a.col_indices.size());
  }
  return a;
}

double dirichlet_energy(const Graph& g, const DenseMatrix& h) {
  if (h.rows() != g.num_nodes())
    throw ValidationError("dirichlet_energy: H has " + std::to_string(h.rows()) + " rows, graph has " +
                          std::to_string(g.num_nodes()) + " nodes");
  const auto& deg = g.degrees();
  CompensatedSum s;
  for (auto [u, v] : g.edges()) {
    const double su = 1.0 / std::sqrt(1.0 + static_cast<double>(deg[u]));
    const double sv = 1.0 / std::sqrt(1.0 + static_cast<double>(deg[v]));
    auto hu = h.row(u);
    auto hv = h.row(v);
    for (std::size_t k = 0; k < h.cols(); ++k) {
      const double diff = hu[k] * su - hv[k] * sv;
      s.add(diff * diff);
    }
  }
  return s.value();
}

double dirichlet_energy_trace(const Graph& g, const NormalizedAdjacency& a_hat, const DenseMatrix& h) {
  if (h.rows() != g.num_nodes()) throw ValidationError("dirichlet_energy_trace: row-count mismatch");
  // tr(H^T L H) = ||H||^2 - <H, A_hat H>
  const DenseMatrix ah = spmm(a_hat, h);
  return squared_norm(h) - frobenius_inner(h, ah);
}

double gev(const Graph& g, const DenseMatrix& h) {
  const double norm2 = squared_norm(h);
  if (!(norm2 > 0.0) || !std::isfinite(norm2)) throw NumericError("degenerate embedding: ||H||_F is zero or non-finite");
  const double ratio = dirichlet_energy(g, h) / norm2;
  return std::clamp(ratio, 0.0, 2.0);
}

void validate_dataset(const Dataset& ds) {
  const std::size_t n = ds.graph.num_nodes();
  if (ds.features.rows() != n)
    throw ValidationError("features have " + std::to_string(ds.features.rows()) + " rows, expected " + std::to_string(n));
  if (ds.features.cols() < 1) throw ValidationError("feature dimension must be >= 1");
  if (ds.num_classes < 2) throw ValidationError("num_classes must be >= 2");
  if (ds.labels.size() != n) throw ValidationError("labels count does not match node count");
  for (std::size_t i = 0; i < n; ++i)
    if (ds.labels[i] >= ds.num_classes) throw ValidationError("label out of range at node " + std::to_string(i));
  std::vector<char> seen(n, 0);
  for (const auto* mask : {&ds.splits.train, &ds.splits.val, &ds.splits.test}) {
    for (std::size_t i : *mask) {
      if (i >= n) throw ValidationError("split index " + std::to_string(i) + " out of range");
      if (seen[i]) throw ValidationError("split index " + std::to_string(i) + " appears in more than one mask");
      seen[i] = 1;
    }
  }
  check_finite(ds.features, "features");
}

}  // namespace spog
