#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spog/gcn.hpp"
#include "spog/graph.hpp"
#include "spog/init.hpp"
#include "spog/model.hpp"

namespace spog {

/// Which embedding GEV is computed on. `Deep` is H^(L) for vanilla and X^(L)
/// for skip models; `Output` is always the logits.
enum class GevTarget { Deep, Output };

/// Squared norms (main-text metrics) or plain norms (single-sample search estimators).
enum class NormForm { Squared, Plain };

/// One-sample signal-propagation profile, all in log10.
struct SpProfile {
  std::vector<double> log10_fsp;  // log10(||H^(l)||_F^2 / ||X||_F^2), l = 1..L
  std::vector<double> log10_bsp;  // log10 ||d loss / d W^(l)||_F^2; entry 1 has a different shape
  double gev = 0.0;
  bool gev_saturated = false;
  bool saturated = false;  // forward or backward produced a non-finite value
  std::string saturation_note;
  std::uint64_t seed = 0;
};

struct ProfileOptions {
  GevTarget gev_target = GevTarget::Deep;
};

/// One forward and one backward pass (training-mask loss) at the given parameters.
/// Non-finite values are reported through the saturation flags, never thrown.
SpProfile sp_profile(const ModelSpec& spec, const ModelParams& params, const Dataset& ds,
                     const NormalizedAdjacency& a_hat, const ProfileOptions& opts = {});

/// Seed-averaged summary of one metric at one depth.
struct MetricSummary {
  double mean = 0.0;        // raw-ratio mean (FSP/BSP) or raw GEV mean
  double log10_mean = 0.0;  // log10 of `mean`, or mean of log10 values when saturated
  double log10_std_error = 0.0;
  double std_error = 0.0;  // standard error of the raw values
  std::size_t saturated_seeds = 0;
  bool log_domain = false;  // averaged in log space because raw values were not representable
};

struct DepthReport {
  std::size_t depth = 0;
  MetricSummary fsp;  // final-layer forward ratio
  MetricSummary bsp;  // first-layer gradient norm
  MetricSummary gev;
  // Per-seed values in seed order: log10 FSP, log10 BSP, GEV (NaN when saturated).
  std::vector<double> fsp_values;
  std::vector<double> bsp_values;
  std::vector<double> gev_values;
};

struct SpReport {
  std::string scheme_id;
  std::size_t num_seeds = 0;
  std::vector<DepthReport> depths;
};

/// Evaluates sp_profile for seeds scheme.seed + s, s < num_seeds, at every depth
/// of the grid (spec.depth is overridden). Per-seed work may run on `threads`
/// workers; the reduction is in seed order.
SpReport sp_report(ModelSpec spec, const InitScheme& scheme, const Dataset& ds, const std::vector<std::size_t>& depths,
                   std::size_t num_seeds, const ProfileOptions& opts = {}, std::size_t threads = 1);

/// Stability statistics. Vanilla: (M^(1)/M^(L-1) - 1)^2 and (M^(2)/M^(L-1) - 1)^2.
/// Skip models: max/min over 1 <= l < L (FSP) and 1 < l < L (BSP).
/// Ratios are formed in log space. Throws NumericError on saturated entries and
/// ValidationError when the profile has fewer than 3 layers.
double v_fsp(const SpProfile& profile, Arch arch, NormForm form = NormForm::Squared);
double v_bsp(const SpProfile& profile, Arch arch, NormForm form = NormForm::Squared);

}  // namespace spog
