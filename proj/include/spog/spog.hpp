#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "spog/graph.hpp"
#include "spog/init.hpp"
#include "spog/metrics.hpp"
#include "spog/model.hpp"
#include "spog/rng.hpp"

namespace spog {

/// `Fd`: random-direction forward differences. `Central`: coordinate-wise
/// central differences (deterministic, 2 * |gamma| evaluations).
enum class GradientMode { Fd, Central };

std::string to_string(GradientMode m);
GradientMode parse_gradient_mode(const std::string& name);

struct SpogConfig {
  double w1 = 1.0;
  double w2 = 10.0;
  double w3 = 1.0;
  double lr = 0.1;
  std::size_t iterations = 100;
  std::size_t patience = 10;   // non-improving steps before stopping
  double fd_step = 1e-2;       // relative to max |gamma|
  std::size_t mc_directions = 3;
  bool shared_scale = false;   // forced on for skip architectures
  double clamp_min = 1e-6;
  double max_step = 0.05;      // cap on max |gamma(t+1) - gamma(t)| before projection; 0 disables
  std::uint64_t seed = 0;
  bool return_best = true;     // best-seen gamma instead of the last iterate
  GradientMode gradient_mode = GradientMode::Fd;

  /// (1, 10, 1) and patience 10 for vanilla; (1, 1, 1), patience 20 and a shared scale otherwise.
  static SpogConfig defaults_for(Arch arch);
  void validate() const;
};

inline constexpr double kSaturatedObjective = 1e12;

struct SpogEvaluation {
  double objective = 0.0;
  double v_fsp = 0.0;
  double v_bsp = 0.0;
  double gev = 0.0;
  bool saturated = false;
  std::string note;
};

/// F = w1 V_FSP + w2 V_BSP - w3 GEV at W^(l) = gamma_l * base W^(l), with the
/// plain-norm single-sample estimators. Saturation, or an objective at or above
/// kSaturatedObjective, yields kSaturatedObjective.
SpogEvaluation spog_objective(const ModelSpec& spec, const ModelParams& base, const std::vector<double>& gamma,
                              const Dataset& ds, const NormalizedAdjacency& a_hat, double w1, double w2, double w3);

using ScaleObjective = std::function<double(const std::vector<double>&)>;

/// Mean over `directions` draws mu ~ N(0, I) of (F(gamma + step mu) - F(gamma)) / step * mu.
/// Probe points are projected onto [clamp_min, inf). Throws NumericError when F(gamma) is not finite.
std::vector<double> estimate_grad_fd(const ScaleObjective& f, const std::vector<double>& gamma, double step,
                                     std::size_t directions, RngStream& rng, double clamp_min = 1e-6);

/// (F(gamma + step e_i) - F(gamma - step e_i)) / (2 step) per coordinate.
std::vector<double> estimate_grad_central(const ScaleObjective& f, const std::vector<double>& gamma, double step,
                                          double clamp_min = 1e-6);

enum class StopReason { MaxIter, Patience };
std::string to_string(StopReason r);

struct SpogResult {
  std::vector<double> gamma;       // returned scales (best-seen or last per config)
  std::vector<double> best_gamma;
  std::vector<double> last_gamma;
  // Index 0 is the starting point gamma = 1; entry t + 1 follows update t.
  std::vector<std::vector<double>> gamma_trace;
  std::vector<double> objective_trace;
  std::vector<double> best_objective_trace;
  std::vector<double> v_fsp_trace;
  std::vector<double> v_bsp_trace;
  std::vector<double> gev_trace;
  std::vector<char> saturated_trace;
  std::size_t iterations = 0;
  StopReason stop_reason = StopReason::MaxIter;
  SpogConfig config;
  ModelParams params;  // apply_scales(base, gamma)
};

/// Projected gradient descent over the scales, starting from gamma = 1 with a
/// fixed base draw from `base_scheme`. Throws NumericError when every
/// evaluation saturated.
SpogResult spog_search(const ModelSpec& spec, const InitScheme& base_scheme, const Dataset& ds, SpogConfig cfg);

}  // namespace spog
