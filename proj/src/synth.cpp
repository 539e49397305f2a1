#include <algorithm>
#include <cmath>
#include <numeric>

#include "spog/error.hpp"
#include "spog/graph.hpp"
#include "spog/rng.hpp"

namespace spog {
namespace {

enum Purpose : std::uint64_t { kEdges = 1, kMeans = 2, kNoise = 3, kSplit = 4 };

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError(std::string(name) + " must lie in [0, 1]");
}

// Per-class shuffled split so every class is present in train when possible.
Splits stratified_split(const std::vector<std::size_t>& labels, std::size_t num_classes, double train_frac,
                        double val_frac, RngStream& rng) {
  Splits s;
  for (std::size_t c = 0; c < num_classes; ++c) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == c) idx.push_back(i);
    for (std::size_t i = idx.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
      std::swap(idx[i - 1], idx[std::min(j, i - 1)]);
    }
    const auto n_train = static_cast<std::size_t>(std::round(train_frac * static_cast<double>(idx.size())));
    const auto n_val = static_cast<std::size_t>(std::round(val_frac * static_cast<double>(idx.size())));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (k < n_train) s.train.push_back(idx[k]);
      else if (k < n_train + n_val) s.val.push_back(idx[k]);
      else s.test.push_back(idx[k]);
    }
  }
  for (auto* m : {&s.train, &s.val, &s.test}) std::sort(m->begin(), m->end());
  return s;
}

}  // namespace

SynthKind parse_synth_kind(const std::string& name) {
  if (name == "sbm") return SynthKind::Sbm;
  if (name == "cycle") return SynthKind::Cycle;
  if (name == "path") return SynthKind::Path;
  if (name == "caveman") return SynthKind::Caveman;
  throw ValidationError("unknown dataset kind: " + name);
}

std::string to_string(SynthKind kind) {
  switch (kind) {
    case SynthKind::Sbm: return "sbm";
    case SynthKind::Cycle: return "cycle";
    case SynthKind::Path: return "path";
    case SynthKind::Caveman: return "caveman";
  }
  return "?";
}

Dataset synth_dataset(const SynthParams& p, std::uint64_t seed) {
  if (p.feature_dim < 1) throw ValidationError("feature_dim must be >= 1");
  if (!(p.noise >= 0.0) || !(p.class_separation >= 0.0)) throw ValidationError("noise and class_separation must be >= 0");
  if (!(p.train_fraction > 0.0) || !(p.val_fraction >= 0.0) || p.train_fraction + p.val_fraction > 1.0)
    throw ValidationError("split fractions must be positive and sum to at most 1");

  Dataset ds;
  std::vector<Edge> edges;
  std::size_t n = 0;
  RngStream edge_rng(seed, stream_id(kEdges));

  switch (p.kind) {
    case SynthKind::Sbm: {
      if (p.block_sizes.size() < 2) throw ValidationError("sbm needs at least two blocks");
      for (std::size_t b : p.block_sizes)
        if (b == 0) throw ValidationError("sbm block sizes must be positive (empty block)");
      check_probability(p.p_in, "p_in");
      check_probability(p.p_out, "p_out");
      if (p.p_in < p.p_out) ds.warnings.emplace_back("heterophilic regime: p_in < p_out");
      for (std::size_t b = 0; b < p.block_sizes.size(); ++b)
        for (std::size_t k = 0; k < p.block_sizes[b]; ++k) ds.labels.push_back(b);
      n = ds.labels.size();
      ds.num_classes = p.block_sizes.size();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
          const double prob = ds.labels[i] == ds.labels[j] ? p.p_in : p.p_out;
          if (edge_rng.uniform() < prob) edges.emplace_back(i, j);
        }
      break;
    }
    case SynthKind::Cycle:
    case SynthKind::Path: {
      n = p.num_nodes;
      if (n < 1) throw ValidationError("num_nodes must be >= 1");
      if (p.num_classes < 2 || p.num_classes > n) throw ValidationError("num_classes must lie in [2, num_nodes]");
      if (p.kind == SynthKind::Cycle && n < 3) throw ValidationError("a cycle needs at least 3 nodes");
      for (std::size_t i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
      if (p.kind == SynthKind::Cycle) edges.emplace_back(n - 1, 0);
      for (std::size_t i = 0; i < n; ++i) ds.labels.push_back(i * p.num_classes / n);
      ds.num_classes = p.num_classes;
      break;
    }
    case SynthKind::Caveman: {
      if (p.num_caves < 2 || p.cave_size < 2) throw ValidationError("caveman needs >= 2 caves of size >= 2");
      n = p.num_caves * p.cave_size;
      for (std::size_t c = 0; c < p.num_caves; ++c) {
        const std::size_t base = c * p.cave_size;
        for (std::size_t i = 0; i < p.cave_size; ++i) {
          ds.labels.push_back(c);
          for (std::size_t j = i + 1; j < p.cave_size; ++j) edges.emplace_back(base + i, base + j);
        }
        // ring of caves: node 0 of this cave to node 1 of the next
        const std::size_t next = ((c + 1) % p.num_caves) * p.cave_size;
        edges.emplace_back(base, next + 1);
      }
      ds.num_classes = p.num_caves;
      break;
    }
  }

  ds.graph = Graph(n, edges);

  RngStream mean_rng(seed, stream_id(kMeans));
  DenseMatrix means(ds.num_classes, p.feature_dim);
  for (std::size_t c = 0; c < ds.num_classes; ++c) {
    double norm2 = 0.0;
    for (double& x : means.row(c)) {
      x = mean_rng.normal();
      norm2 += x * x;
    }
    const double s = norm2 > 0.0 ? p.class_separation / std::sqrt(norm2) : 0.0;
    for (double& x : means.row(c)) x *= s;
  }
  RngStream noise_rng(seed, stream_id(kNoise));
  ds.features = DenseMatrix(n, p.feature_dim);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < p.feature_dim; ++k)
      ds.features(i, k) = means(ds.labels[i], k) + p.noise * noise_rng.normal();

  RngStream split_rng(seed, stream_id(kSplit));
  ds.splits = stratified_split(ds.labels, ds.num_classes, p.train_fraction, p.val_fraction, split_rng);
  validate_dataset(ds);
  return ds;
}

}  // namespace spog
