#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spog/graph.hpp"
#include "spog/linalg.hpp"
#include "spog/model.hpp"

namespace spog {

/// Infinite-width covariance of one layer's channels.
struct NngpState {
  std::size_t layer = 0;
  DenseMatrix cov;
};

/// How G(Sigma)_ij = E[act(h_i) act(h_j)] is evaluated.
struct KernelMethod {
  enum class Kind { ClosedForm, GaussHermite, MonteCarlo };
  Kind kind = Kind::ClosedForm;
  std::size_t nodes = 64;          // Gauss-Hermite nodes per dimension
  std::size_t samples = 100000;    // Monte Carlo draws per entry
  std::uint64_t seed = 0;

  static KernelMethod closed_form() { return {Kind::ClosedForm}; }
  static KernelMethod gauss_hermite(std::size_t q = 64) { return {Kind::GaussHermite, q}; }
  static KernelMethod monte_carlo(std::size_t samples, std::uint64_t seed) {
    return {Kind::MonteCarlo, 64, samples, seed};
  }
  /// Closed form for ReLU-like activations, quadrature otherwise.
  static KernelMethod default_for(const Activation& act);
  void validate() const;
};

/// Gauss-Hermite rule for the standard normal: sum_k w_k f(x_k) ~ E[f(Z)].
struct HermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
HermiteRule gauss_hermite_rule(std::size_t q);

/// E[act(u) act(v)] for (u, v) ~ N(0, [[s11, s12], [s12, s22]]).
double bivariate_expectation(const Activation& act, double s11, double s22, double s12, const KernelMethod& method,
                             std::uint64_t stream = 0);

/// G(Sigma) entrywise. Identity returns Sigma; zero-variance rows map to zero rows.
/// The closed form (arc-cosine) is available for ReLU-like activations only.
DenseMatrix g_kernel(const DenseMatrix& sigma, const Activation& act, const KernelMethod& method);

struct NngpSequence {
  std::vector<NngpState> states;  // layers 1..L, or fewer when saturated
  bool saturated = false;
  std::size_t saturated_at = 0;   // first layer that overflowed
};

/// Sigma^(1) = s A X X^T A / d0, Sigma^(l+1) = s A G(Sigma^(l)) A.
NngpSequence nngp_vanilla(const NormalizedAdjacency& a_hat, const DenseMatrix& x, double sigma2,
                          const Activation& act, std::size_t depth, const KernelMethod& method);

/// Linear skip model: Sigma^(1) = s^2 A X X^T A / d0,
/// Sigma^(l+1) = alpha^2 s A Sigma^(l) A + beta^2 Sigma^(l).
NngpSequence nngp_linear_resgcn(const NormalizedAdjacency& a_hat, const DenseMatrix& x, double sigma2, double alpha,
                                double beta, std::size_t depth);

struct NngpMetrics {
  std::vector<double> fsp;          // C tr(Sigma) / ||X||_F^2
  std::vector<double> gev_proxy;    // tr(L Sigma) / tr(Sigma); NaN when tr(Sigma) = 0
  std::vector<double> gev_sampled;  // E[Dir(H) / ||H||^2] by sampling, when requested
  std::vector<char> gev_undefined;
};

struct GevSampling {
  std::size_t draws = 2000;
  std::uint64_t seed = 0;
};

NngpMetrics nngp_metrics(const std::vector<NngpState>& states, const Graph& g, const NormalizedAdjacency& a_hat,
                         std::size_t num_classes, double x_sq_norm,
                         const std::optional<GevSampling>& sampling = std::nullopt);

// ---- theorem verification ----------------------------------------------------

enum class TheoremId { T1Decay, T2ScaleInvariance, T3Modes, T5AbRelu, T6Tanh };

std::string to_string(TheoremId id);
TheoremId parse_theorem(const std::string& name);

struct TheoremInput {
  double sigma2 = 1.0;
  double sigma2_alt = 2.0;  // second variance for scale invariance
  Activation activation = Activation::relu();
  double res_alpha = 1.0;   // skip mixing for the linear skip model
  double res_beta = 1.0;
  std::size_t depth = 12;
  std::size_t num_classes = 2;
};

struct VerificationReport {
  TheoremId theorem = TheoremId::T1Decay;
  bool pass = false;
  bool hypothesis_met = true;
  std::string branch;   // which alternative held, when the statement is a disjunction
  std::string message;
  std::vector<double> per_layer_margins;  // >= 0 means the layer's inequality holds
  std::vector<double> bound_margins;      // closed-form FSP bound, when the hypothesis applies
  double max_relative_deviation = 0.0;    // for equality checks
  std::vector<double> growth_factors;     // T3: per-mode growth, T1/T5/T6: per-layer trace ratio
};

/// Numerically checks one theorem on (g, x). Requires n <= 256.
VerificationReport verify_theorem(TheoremId id, const Graph& g, const DenseMatrix& x, const TheoremInput& input);

}  // namespace spog
