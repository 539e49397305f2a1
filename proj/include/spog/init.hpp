#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spog/linalg.hpp"
#include "spog/model.hpp"
#include "spog/rng.hpp"

namespace spog {

enum class InitFamily { LeCun, Kaiming, Xavier, Conventional, CustomSigma };
enum class WeightDistribution { Normal, Uniform };

std::string to_string(InitFamily f);
InitFamily parse_init_family(const std::string& name);
std::string to_string(WeightDistribution d);
WeightDistribution parse_distribution(const std::string& name);

/// Entry variance rule. With fan_in = d_{l-1}, fan_out = d_l:
///   LeCun 1/fan_in, Kaiming 2/fan_in, Xavier 2/(fan_in+fan_out),
///   Conventional 1/(3 fan_in), CustomSigma sigma2[l]/fan_in.
struct InitScheme {
  InitFamily family = InitFamily::Xavier;
  std::optional<WeightDistribution> distribution;  // family default when empty
  std::vector<double> sigma2;  // CustomSigma: one shared value or one per layer
  std::uint64_t seed = 0;

  static InitScheme of(InitFamily f, std::uint64_t seed = 0) { return {f, std::nullopt, {}, seed}; }
  static InitScheme custom(std::vector<double> sigma2, std::uint64_t seed = 0) {
    return {InitFamily::CustomSigma, std::nullopt, std::move(sigma2), seed};
  }

  WeightDistribution resolved_distribution() const;
  /// Variance for layer `layer` (1-based; 0 and L+1 are the skip-model projections).
  double variance(std::size_t fan_in, std::size_t fan_out, std::size_t layer) const;
  void validate() const;
  std::string id() const;
};

/// i.i.d. zero-mean fan_in x fan_out draw with the scheme's variance.
DenseMatrix sample_weight(const InitScheme& scheme, std::size_t fan_in, std::size_t fan_out, std::size_t layer,
                          RngStream& rng);

/// Full parameter set: sampled weights, zero biases, gates at (1, 1).
/// Each tensor uses its own stream (seed, layer), so any layer can be
/// regenerated independently.
ModelParams initialize_params(const ModelSpec& spec, const InitScheme& scheme);

/// Number of scale factors for `spec`: L for vanilla, 1 (shared) for skip models.
std::size_t num_scales(const ModelSpec& spec);

/// Returns base with W^(l) = gamma_l * base W^(l) for l in [1, L]. A single
/// gamma is broadcast to every layer; the skip-model projections are not scaled.
/// Throws ValidationError on a nonpositive gamma or a length mismatch.
ModelParams apply_scales(const ModelParams& base, const std::vector<double>& gamma);

}  // namespace spog
