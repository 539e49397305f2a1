#include "spog/spog.hpp"

#include <algorithm>
#include <cmath>

#include "spog/error.hpp"
#include "spog/gcn.hpp"

namespace spog {

std::string to_string(GradientMode m) { return m == GradientMode::Fd ? "fd" : "central"; }

GradientMode parse_gradient_mode(const std::string& name) {
  if (name == "fd") return GradientMode::Fd;
  if (name == "central") return GradientMode::Central;
  throw ValidationError("unknown gradient_mode '" + name + "' (expected fd or central)");
}

std::string to_string(StopReason r) { return r == StopReason::MaxIter ? "max_iter" : "patience"; }

SpogConfig SpogConfig::defaults_for(Arch arch) {
  SpogConfig c;
  if (has_skip(arch)) {
    c.w2 = 1.0;
    c.patience = 20;
    c.shared_scale = true;
  }
  return c;
}

void SpogConfig::validate() const {
  if (!(w1 >= 0.0) || !(w2 >= 0.0) || !(w3 >= 0.0)) throw ValidationError("spog: weights w1, w2, w3 must be >= 0");
  if (!(lr > 0.0)) throw ValidationError("spog: lr must be positive");
  if (!(fd_step > 0.0)) throw ValidationError("spog: fd_step must be positive");
  if (mc_directions < 1) throw ValidationError("spog: mc_directions must be >= 1");
  if (patience < 1) throw ValidationError("spog: patience must be >= 1");
  if (!(clamp_min > 0.0)) throw ValidationError("spog: clamp_min must be positive");
  if (!(max_step >= 0.0)) throw ValidationError("spog: max_step must be >= 0");
}

SpogEvaluation spog_objective(const ModelSpec& spec, const ModelParams& base, const std::vector<double>& gamma,
                              const Dataset& ds, const NormalizedAdjacency& a_hat, double w1, double w2, double w3) {
  SpogEvaluation e;
  const auto profile = sp_profile(spec, apply_scales(base, gamma), ds, a_hat);
  auto saturate = [&](const std::string& note) {
    e.saturated = true;
    e.note = note;
    e.objective = kSaturatedObjective;
    e.v_fsp = e.v_bsp = e.gev = std::numeric_limits<double>::quiet_NaN();
    return e;
  };
  if (profile.saturated || profile.gev_saturated) return saturate(profile.saturation_note);
  try {
    e.v_fsp = v_fsp(profile, spec.arch, NormForm::Plain);
    e.v_bsp = v_bsp(profile, spec.arch, NormForm::Plain);
  } catch (const NumericError& err) {
    return saturate(err.what());
  }
  e.gev = profile.gev;
  e.objective = w1 * e.v_fsp + w2 * e.v_bsp - w3 * e.gev;
  if (!std::isfinite(e.objective)) return saturate("non-finite objective");
  if (e.objective >= kSaturatedObjective) return saturate("objective above the saturation sentinel");
  return e;
}

namespace {

std::vector<double> project(std::vector<double> g, double lo) {
  for (double& v : g) v = std::max(v, lo);
  return g;
}

}  // namespace

std::vector<double> estimate_grad_fd(const ScaleObjective& f, const std::vector<double>& gamma, double step,
                                     std::size_t directions, RngStream& rng, double clamp_min) {
  if (!(step > 0.0)) throw ValidationError("estimate_grad_fd: step must be positive");
  if (directions < 1) throw ValidationError("estimate_grad_fd: need at least one direction");
  const double f0 = f(gamma);
  if (!std::isfinite(f0)) throw NumericError("estimate_grad_fd: objective is not finite at the base point");
  std::vector<double> grad(gamma.size(), 0.0);
  std::vector<double> mu(gamma.size());
  for (std::size_t d = 0; d < directions; ++d) {
    std::vector<double> probe(gamma.size());
    for (std::size_t i = 0; i < gamma.size(); ++i) {
      mu[i] = rng.normal();
      probe[i] = gamma[i] + step * mu[i];
    }
    const double slope = (f(project(probe, clamp_min)) - f0) / step;
    for (std::size_t i = 0; i < gamma.size(); ++i) grad[i] += slope * mu[i];
  }
  for (double& g : grad) g /= static_cast<double>(directions);
  return grad;
}

std::vector<double> estimate_grad_central(const ScaleObjective& f, const std::vector<double>& gamma, double step,
                                          double clamp_min) {
  if (!(step > 0.0)) throw ValidationError("estimate_grad_central: step must be positive");
  std::vector<double> grad(gamma.size());
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    auto hi = gamma;
    auto lo = gamma;
    hi[i] += step;
    lo[i] = std::max(lo[i] - step, clamp_min);
    grad[i] = (f(hi) - f(lo)) / (hi[i] - lo[i]);
  }
  return grad;
}

SpogResult spog_search(const ModelSpec& spec, const InitScheme& base_scheme, const Dataset& ds, SpogConfig cfg) {
  spec.validate();
  cfg.validate();
  if (has_skip(spec.arch)) cfg.shared_scale = true;
  if (spec.depth < 3) throw ValidationError("spog: depth must be >= 3");
  if (ds.features.cols() != spec.input_dim || ds.num_classes != spec.num_classes)
    throw ValidationError("spog: model shape does not match the dataset");

  const auto a_hat = normalized_adjacency(ds.graph);
  const ModelParams base = initialize_params(spec, base_scheme);
  const std::size_t k = cfg.shared_scale ? 1 : spec.depth;

  SpogResult res;
  res.config = cfg;
  std::vector<double> gamma(k, 1.0);

  auto evaluate = [&](const std::vector<double>& g) {
    return spog_objective(spec, base, g, ds, a_hat, cfg.w1, cfg.w2, cfg.w3);
  };
  const ScaleObjective objective = [&](const std::vector<double>& g) { return evaluate(g).objective; };

  bool any_finite = false;
  double best = 0.0;
  auto record = [&](const std::vector<double>& g, const SpogEvaluation& e) {
    res.gamma_trace.push_back(g);
    res.objective_trace.push_back(e.objective);
    res.v_fsp_trace.push_back(e.v_fsp);
    res.v_bsp_trace.push_back(e.v_bsp);
    res.gev_trace.push_back(e.gev);
    res.saturated_trace.push_back(e.saturated);
    any_finite = any_finite || !e.saturated;
    const bool improved = res.best_gamma.empty() || e.objective < best;
    if (improved) {
      best = e.objective;
      res.best_gamma = g;
    }
    res.best_objective_trace.push_back(best);
    return improved;
  };

  record(gamma, evaluate(gamma));
  RngStream rng(cfg.seed, stream_id(31));
  std::size_t stale = 0;
  for (std::size_t t = 0; t < cfg.iterations; ++t) {
    const double step = cfg.fd_step * *std::max_element(gamma.begin(), gamma.end());
    const auto grad = cfg.gradient_mode == GradientMode::Fd
                          ? estimate_grad_fd(objective, gamma, step, cfg.mc_directions, rng, cfg.clamp_min)
                          : estimate_grad_central(objective, gamma, step, cfg.clamp_min);
    double scale = cfg.lr;
    if (cfg.max_step > 0.0) {
      double top = 0.0;
      for (double g : grad) top = std::max(top, std::abs(cfg.lr * g));
      if (top > cfg.max_step) scale *= cfg.max_step / top;
    }
    for (std::size_t i = 0; i < k; ++i) gamma[i] = std::max(gamma[i] - scale * grad[i], cfg.clamp_min);
    ++res.iterations;
    stale = record(gamma, evaluate(gamma)) ? 0 : stale + 1;
    if (stale >= cfg.patience) {
      res.stop_reason = StopReason::Patience;
      break;
    }
  }
  if (!any_finite) throw NumericError("spog: every evaluation saturated (" + evaluate(gamma).note + ")");

  res.last_gamma = gamma;
  res.gamma = cfg.return_best ? res.best_gamma : res.last_gamma;
  res.params = apply_scales(base, res.gamma);
  return res;
}

}  // namespace spog
