#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "spog/linalg.hpp"

namespace spog {

using Edge = std::pair<std::size_t, std::size_t>;

/// Undirected simple graph. Edges are stored once, as (u, v) with u < v, sorted.
/// Self-loops are never stored; the normalization adds them.
class Graph {
 public:
  Graph() = default;
  /// Merges duplicates and reversed pairs. Throws ValidationError on a
  /// self-loop or an endpoint >= n.
  Graph(std::size_t n, const std::vector<Edge>& edges);

  std::size_t num_nodes() const { return n_; }
  std::size_t num_edges() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<std::size_t>& degrees() const { return degrees_; }

  /// Connected-component id per node, ids assigned in order of lowest node.
  std::vector<std::size_t> components() const;
  std::size_t num_components() const;

  bool operator==(const Graph& other) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> degrees_;
};

/// D~^{-1/2} (A + I) D~^{-1/2} in CSR form, n + 2|E| stored entries.
using NormalizedAdjacency = CsrMatrix;

NormalizedAdjacency normalized_adjacency(const Graph& g);

/// Edge-sum Dirichlet energy: sum over edges of ||h_i/sqrt(1+d_i) - h_j/sqrt(1+d_j)||^2.
double dirichlet_energy(const Graph& g, const DenseMatrix& h);
/// Same quantity through tr(H^T (I - A_hat) H).
double dirichlet_energy_trace(const Graph& g, const NormalizedAdjacency& a_hat, const DenseMatrix& h);

/// Dir(H) / ||H||_F^2, in [0, 2]. Throws NumericError on a zero (or non-finite) H.
double gev(const Graph& g, const DenseMatrix& h);

struct Splits {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

struct Dataset {
  Graph graph;
  DenseMatrix features;           // n x d0
  std::vector<std::size_t> labels;  // in [0, num_classes)
  std::size_t num_classes = 0;
  Splits splits;
  std::vector<std::string> warnings;

  std::size_t num_nodes() const { return graph.num_nodes(); }
  std::size_t feature_dim() const { return features.cols(); }
};

/// Throws ValidationError on any broken Dataset invariant.
void validate_dataset(const Dataset& ds);

/// Reads a manifest JSON and the files it references (paths relative to the manifest).
Dataset load_dataset(const std::filesystem::path& manifest_path);
/// Writes manifest.json, edges.tsv, features.csv, labels.csv and splits.json into `dir`.
void save_dataset(const Dataset& ds, const std::filesystem::path& dir);

enum class SynthKind { Sbm, Cycle, Path, Caveman };

struct SynthParams {
  SynthKind kind = SynthKind::Sbm;
  // sbm
  std::vector<std::size_t> block_sizes;
  double p_in = 0.1;
  double p_out = 0.01;
  // cycle / path
  std::size_t num_nodes = 0;
  std::size_t num_classes = 2;
  // caveman
  std::size_t num_caves = 0;
  std::size_t cave_size = 0;
  // node features: class mean (random direction of norm class_separation) + N(0, noise^2)
  std::size_t feature_dim = 8;
  double class_separation = 1.0;
  double noise = 1.0;
  // splits: fractions of nodes, the remainder is test
  double train_fraction = 0.2;
  double val_fraction = 0.2;
};

/// Deterministic given (params, seed). An SBM with p_in < p_out is accepted and
/// carries a "heterophilic regime" warning.
Dataset synth_dataset(const SynthParams& params, std::uint64_t seed);

SynthKind parse_synth_kind(const std::string& name);
std::string to_string(SynthKind kind);

}  // namespace spog
