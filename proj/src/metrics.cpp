#include "spog/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "spog/error.hpp"

namespace spog {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double log10_sq(const DenseMatrix& m) {
  const double f = frobenius_norm(m);
  if (!std::isfinite(f)) return kNaN;
  return f > 0.0 ? 2.0 * std::log10(f) : -std::numeric_limits<double>::infinity();
}

MetricSummary summarize_log(const std::vector<double>& log_values) {
  MetricSummary s;
  std::vector<double> finite;
  for (double v : log_values) {
    if (std::isfinite(v)) finite.push_back(v);
    else ++s.saturated_seeds;
  }
  if (finite.empty()) {
    s.mean = s.log10_mean = kNaN;
    s.log_domain = true;
    return s;
  }
  const auto k = static_cast<double>(finite.size());
  double lm = 0.0;
  for (double v : finite) lm += v;
  lm /= k;
  double lvar = 0.0;
  for (double v : finite) lvar += (v - lm) * (v - lm);
  s.log10_std_error = finite.size() > 1 ? std::sqrt(lvar / (k - 1.0) / k) : 0.0;

  const double top = *std::max_element(finite.begin(), finite.end());
  if (s.saturated_seeds == 0 && top < 300.0) {
    double m = 0.0;
    for (double v : finite) m += std::pow(10.0, v);
    m /= k;
    double var = 0.0;
    for (double v : finite) var += (std::pow(10.0, v) - m) * (std::pow(10.0, v) - m);
    s.mean = m;
    s.std_error = finite.size() > 1 ? std::sqrt(var / (k - 1.0) / k) : 0.0;
    s.log10_mean = m > 0.0 ? std::log10(m) : -std::numeric_limits<double>::infinity();
  } else {
    s.log_domain = true;
    s.log10_mean = lm;
    s.mean = top < 300.0 ? std::pow(10.0, lm) : std::numeric_limits<double>::infinity();
  }
  return s;
}

MetricSummary summarize_raw(const std::vector<double>& values, const std::vector<char>& saturated) {
  MetricSummary s;
  std::vector<double> ok;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (saturated[i] || !std::isfinite(values[i])) ++s.saturated_seeds;
    else ok.push_back(values[i]);
  }
  if (ok.empty()) {
    s.mean = s.log10_mean = kNaN;
    return s;
  }
  const auto k = static_cast<double>(ok.size());
  double m = 0.0;
  for (double v : ok) m += v;
  m /= k;
  double var = 0.0;
  for (double v : ok) var += (v - m) * (v - m);
  s.mean = m;
  s.std_error = ok.size() > 1 ? std::sqrt(var / (k - 1.0) / k) : 0.0;
  s.log10_mean = m > 0.0 ? std::log10(m) : -std::numeric_limits<double>::infinity();
  s.log10_std_error = m > 0.0 ? s.std_error / (m * std::log(10.0)) : 0.0;
  return s;
}

}  // namespace

SpProfile sp_profile(const ModelSpec& spec, const ModelParams& params, const Dataset& ds,
                     const NormalizedAdjacency& a_hat, const ProfileOptions& opts) {
  SpProfile p;
  const double log_x = log10_sq(ds.features);
  const std::size_t L = spec.depth;
  p.log10_fsp.assign(L, kNaN);
  p.log10_bsp.assign(L, kNaN);

  ForwardTrace trace;
  try {
    trace = forward(spec, params, a_hat, ds.features);
  } catch (const NumericError& e) {
    p.saturated = true;
    p.gev_saturated = true;
    p.gev = kNaN;
    p.saturation_note = e.what();
    return p;
  }
  for (std::size_t l = 0; l < L; ++l) p.log10_fsp[l] = trace.log10_sq_norms[l] - log_x;

  const DenseMatrix& target = opts.gev_target == GevTarget::Output ? trace.logits : trace.deep_embedding(spec.arch);
  try {
    p.gev = gev(ds.graph, target);
  } catch (const NumericError& e) {
    p.gev = kNaN;
    p.gev_saturated = true;
    p.saturation_note = e.what();
  }

  const auto back = loss_and_backward(spec, params, a_hat, trace, ds.labels, ds.splits.train);
  for (std::size_t l = 0; l < L; ++l) {
    p.log10_bsp[l] = log10_sq(back.grads.weights[l]);
    if (std::isnan(p.log10_bsp[l])) {
      p.saturated = true;
      p.saturation_note = "non-finite gradient at layer " + std::to_string(l + 1);
    }
  }
  return p;
}

SpReport sp_report(ModelSpec spec, const InitScheme& scheme, const Dataset& ds, const std::vector<std::size_t>& depths,
                   std::size_t num_seeds, const ProfileOptions& opts, std::size_t threads) {
  if (num_seeds < 1) throw ValidationError("sp_report: num_seeds must be >= 1");
  if (depths.empty()) throw ValidationError("sp_report: empty depth grid");
  const auto a_hat = normalized_adjacency(ds.graph);
  SpReport report;
  report.scheme_id = scheme.id();
  report.num_seeds = num_seeds;

  for (std::size_t depth : depths) {
    spec.depth = depth;
    spec.validate();
    std::vector<SpProfile> profiles(num_seeds);
    auto work = [&](std::size_t begin, std::size_t stride) {
      for (std::size_t s = begin; s < num_seeds; s += stride) {
        InitScheme sch = scheme;
        sch.seed = scheme.seed + s;
        const auto params = initialize_params(spec, sch);
        profiles[s] = sp_profile(spec, params, ds, a_hat, opts);
        profiles[s].seed = sch.seed;
      }
    };
    const std::size_t workers = std::max<std::size_t>(1, std::min(threads, num_seeds));
    if (workers == 1) {
      work(0, 1);
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
    }

    std::vector<double> fsp, bsp, gev_values;
    std::vector<char> gev_sat;
    for (const auto& p : profiles) {
      fsp.push_back(p.log10_fsp.back());
      bsp.push_back(p.log10_bsp.front());
      gev_values.push_back(p.gev);
      gev_sat.push_back(p.gev_saturated);
    }
    DepthReport dr;
    dr.depth = depth;
    dr.fsp = summarize_log(fsp);
    dr.bsp = summarize_log(bsp);
    dr.gev = summarize_raw(gev_values, gev_sat);
    dr.fsp_values = fsp;
    dr.bsp_values = bsp;
    dr.gev_values = gev_values;
    report.depths.push_back(dr);
  }
  return report;
}

namespace {

// log10 of the max/min (or first/last) ratio over the selected entries of `values`.
double log_ratio(const std::vector<double>& values, std::size_t lo, std::size_t hi, bool extremes,
                 std::size_t num_idx, std::size_t den_idx) {
  for (std::size_t l = lo; l <= hi; ++l)
    if (!std::isfinite(values[l - 1])) throw NumericError("metric saturated; reduce depth or adjust scales");
  if (!extremes) return values[num_idx - 1] - values[den_idx - 1];
  const auto first = values.begin() + static_cast<std::ptrdiff_t>(lo - 1);
  const auto last = values.begin() + static_cast<std::ptrdiff_t>(hi);
  return *std::max_element(first, last) - *std::min_element(first, last);
}

double v_from_log_ratio(double log10_ratio, NormForm form) {
  const double lr = form == NormForm::Plain ? 0.5 * log10_ratio : log10_ratio;
  const double r = std::pow(10.0, lr);
  return (r - 1.0) * (r - 1.0);
}

}  // namespace

double v_fsp(const SpProfile& profile, Arch arch, NormForm form) {
  const std::size_t L = profile.log10_fsp.size();
  if (L < 3) throw ValidationError("V_FSP needs a profile with at least 3 layers");
  const double lr = log_ratio(profile.log10_fsp, 1, L - 1, has_skip(arch), 1, L - 1);
  return v_from_log_ratio(lr, form);
}

double v_bsp(const SpProfile& profile, Arch arch, NormForm form) {
  const std::size_t L = profile.log10_bsp.size();
  if (L < 3) throw ValidationError("V_BSP needs a profile with at least 3 layers");
  const double lr = log_ratio(profile.log10_bsp, 2, L - 1, has_skip(arch), 2, L - 1);
  return v_from_log_ratio(lr, form);
}

}  // namespace spog
