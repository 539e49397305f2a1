#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "spog/graph.hpp"
#include "spog/linalg.hpp"
#include "spog/model.hpp"

namespace spog {

/// Inverted dropout on hidden post-activations (never the input or readout).
struct DropoutConfig {
  double rate = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t step = 0;  // mixes into the stream so each epoch draws a fresh mask
};

/// Intermediates of one forward pass, indexed by layer l in [1, L] at l - 1.
struct ForwardTrace {
  DenseMatrix input;                         // X
  DenseMatrix input_embedding;               // X^(0): X for vanilla, X W^(0) for skip models
  std::vector<DenseMatrix> aggregated;       // A_hat X^(l-1)
  std::vector<DenseMatrix> pre_activations;  // H^(l)
  std::vector<DenseMatrix> post_activations; // X^(l), after dropout; vanilla stores l < L only
  std::vector<DenseMatrix> dropout_masks;    // scaled keep-masks (empty without dropout)
  DenseMatrix logits;                        // n x C
  std::vector<double> log10_sq_norms;        // log10 ||H^(l)||_F^2

  /// The embedding whose smoothness GEV measures: H^(L) for vanilla, X^(L) for skip models.
  const DenseMatrix& deep_embedding(Arch arch) const;
};

/// Full-graph forward pass. Throws ValidationError on a shape mismatch and
/// NumericError (naming the layer) when a non-finite value appears.
ForwardTrace forward(const ModelSpec& spec, const ModelParams& params, const NormalizedAdjacency& a_hat,
                     const DenseMatrix& x, const std::optional<DropoutConfig>& dropout = std::nullopt);

struct BackwardResult {
  double loss = 0.0;
  ModelParams grads;
  std::vector<DenseMatrix> hidden_grads;  // d loss / d H^(l)
};

/// Mean softmax cross-entropy over `mask` and its exact reverse-mode gradient.
BackwardResult loss_and_backward(const ModelSpec& spec, const ModelParams& params, const NormalizedAdjacency& a_hat,
                                 const ForwardTrace& trace, std::span<const std::size_t> labels,
                                 std::span<const std::size_t> mask);

/// Loss only, no gradients.
double softmax_cross_entropy(const DenseMatrix& logits, std::span<const std::size_t> labels,
                             std::span<const std::size_t> mask);

/// Argmax per row, ties to the lowest class index.
std::vector<std::size_t> predict(const DenseMatrix& logits);
double accuracy(const DenseMatrix& logits, std::span<const std::size_t> labels, std::span<const std::size_t> mask);
/// Forward without dropout followed by accuracy on `mask`.
double evaluate(const ModelSpec& spec, const ModelParams& params, const NormalizedAdjacency& a_hat,
                const Dataset& ds, std::span<const std::size_t> mask);

}  // namespace spog
