#include <algorithm>
#include <cmath>
#include <cstdio>

#include "spog/error.hpp"
#include "spog/nngp.hpp"

namespace spog {
namespace {

constexpr double kIneqTol = 1e-12;
constexpr double kEqualityTol = 1e-10;
constexpr double kModeFloor = 1e-4;

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::vector<double> traces(const NngpSequence& seq) {
  std::vector<double> t;
  for (const auto& st : seq.states) t.push_back(trace(st.cov));
  return t;
}

// Per-layer relative margin of tr(S^(l+1)) <= factor * tr(S^(l)).
void decay_margins(const std::vector<double>& tr, double factor, VerificationReport& r) {
  for (std::size_t l = 0; l + 1 < tr.size(); ++l) {
    const double bound = factor * tr[l];
    r.per_layer_margins.push_back(bound > 0.0 ? (bound - tr[l + 1]) / bound : -tr[l + 1]);
    r.growth_factors.push_back(tr[l] > 0.0 ? tr[l + 1] / tr[l] : 0.0);
  }
}

bool all_nonnegative(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double m) { return m >= -kIneqTol; });
}

void check_saturation(const NngpSequence& seq) {
  if (seq.saturated)
    throw NumericError("covariance overflowed at layer " + std::to_string(seq.saturated_at) +
                       "; reduce depth or variance");
}

VerificationReport relu_decay(TheoremId id, const Graph& g, const NormalizedAdjacency& a_hat, const DenseMatrix& x,
                              const TheoremInput& in) {
  VerificationReport r;
  r.theorem = id;
  const Activation act = id == TheoremId::T1Decay ? Activation::relu() : in.activation;
  if (!act.is_relu_like()) throw ValidationError(to_string(id) + " needs a ReLU-like activation");
  const double a2b2 = act.slope_pos() * act.slope_pos() + act.slope_neg() * act.slope_neg();
  const double factor = in.sigma2 * a2b2 / 2.0;
  const auto seq = nngp_vanilla(a_hat, x, in.sigma2, act, in.depth, KernelMethod::closed_form());
  check_saturation(seq);
  const auto tr = traces(seq);
  decay_margins(tr, factor, r);
  r.pass = all_nonnegative(r.per_layer_margins);

  const double d0 = static_cast<double>(x.cols());
  const double C = static_cast<double>(in.num_classes);
  const auto m = nngp_metrics(seq.states, g, a_hat, in.num_classes, squared_norm(x));
  const double critical = 2.0 / a2b2;
  const double rel = (in.sigma2 - critical) / critical;
  if (rel < -kIneqTol) {
    for (std::size_t l = 0; l < m.fsp.size(); ++l) {
      const double bound = 2.0 * C / (a2b2 * d0) * std::pow(factor, static_cast<double>(l + 1));
      r.bound_margins.push_back((bound - m.fsp[l]) / bound);
    }
    r.pass = r.pass && all_nonnegative(r.bound_margins);
    r.message = r.pass ? "per-layer decay and FSP bound hold" : "inequality violated";
  } else if (rel <= kIneqTol) {
    // At the critical variance either FSP or GEV decays; report the one that did.
    const double fsp_ratio = m.fsp.back() / m.fsp.front();
    const double gev_ratio = m.gev_proxy.back() / m.gev_proxy.front();
    r.branch = gev_ratio <= fsp_ratio ? "gev" : "fsp";
    r.message = fmt("critical variance: fsp ratio %.6g, gev ratio %.6g", fsp_ratio, gev_ratio);
  } else {
    r.hypothesis_met = false;
    r.message = fmt("theorem hypothesis unmet: sigma2 = %.6g exceeds %.6g; only the per-layer inequality is checked",
                    in.sigma2, critical);
  }
  return r;
}

VerificationReport scale_invariance(const NormalizedAdjacency& a_hat, const DenseMatrix& x, const TheoremInput& in) {
  VerificationReport r;
  r.theorem = TheoremId::T2ScaleInvariance;
  const Activation act = in.activation;
  if (!act.is_relu_like()) throw ValidationError("scale invariance needs a ReLU-like activation");
  if (!(in.sigma2_alt > 0.0)) throw ValidationError("sigma2_alt must be positive");
  const auto sa = nngp_vanilla(a_hat, x, in.sigma2, act, in.depth, KernelMethod::closed_form());
  const auto sb = nngp_vanilla(a_hat, x, in.sigma2_alt, act, in.depth, KernelMethod::closed_form());
  check_saturation(sa);
  check_saturation(sb);
  double worst = 0.0;
  for (std::size_t l = 0; l < sa.states.size(); ++l) {
    const double p = static_cast<double>(l + 1);
    const double ka = std::pow(in.sigma2, p);
    const double kb = std::pow(in.sigma2_alt, p);
    const double scale = max_abs(sa.states[l].cov) / ka;
    double dev = 0.0;
    for (std::size_t i = 0; i < sa.states[l].cov.data().size(); ++i) {
      const double va = sa.states[l].cov.data()[i] / ka;
      const double vb = sb.states[l].cov.data()[i] / kb;
      const double denom = std::max(std::abs(va), scale * 1e-12);
      if (denom > 0.0) dev = std::max(dev, std::abs(va - vb) / denom);
    }
    r.per_layer_margins.push_back(kEqualityTol - dev);
    worst = std::max(worst, dev);
  }
  r.max_relative_deviation = worst;
  r.pass = worst < kEqualityTol;
  r.message = fmt("max relative deviation of normalized covariances %.3g", worst);
  return r;
}

VerificationReport modes(const NormalizedAdjacency& a_hat, const DenseMatrix& x, const TheoremInput& in) {
  VerificationReport r;
  r.theorem = TheoremId::T3Modes;
  const double a2 = in.res_alpha * in.res_alpha;
  const double b2 = in.res_beta * in.res_beta;
  const auto eig = symmetric_eigendecompose(a_hat.to_dense());
  const std::size_t n = eig.values.size();

  // Top eigenspace of A (eigenvalue 1, one vector per connected component).
  double proj = 0.0;
  std::size_t top = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(eig.values[k] - 1.0) > 1e-9) continue;
    ++top;
    for (std::size_t c = 0; c < x.cols(); ++c) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += eig.vectors(i, k) * x(i, c);
      proj += s * s;
    }
  }
  if (top == 0 || proj <= 1e-24 * squared_norm(x)) {
    r.hypothesis_met = false;
    r.message = "theorem hypothesis unmet: X^T u = 0 for the top eigenvector";
    return r;
  }

  const auto seq = nngp_linear_resgcn(a_hat, x, in.sigma2, in.res_alpha, in.res_beta, in.depth);
  check_saturation(seq);
  const DenseMatrix& u = eig.vectors;
  std::vector<std::vector<double>> coeff;
  for (const auto& st : seq.states) {
    const DenseMatrix m = matmul_tn(u, matmul(st.cov, u));
    std::vector<double> c(n);
    for (std::size_t k = 0; k < n; ++k) c[k] = m(k, k);
    coeff.push_back(c);
  }
  for (std::size_t k = 0; k < n; ++k) r.growth_factors.push_back(a2 * in.sigma2 * eig.values[k] * eig.values[k] + b2);

  double worst = 0.0;
  for (std::size_t l = 0; l + 1 < coeff.size(); ++l) {
    const double cmax = *std::max_element(coeff[l].begin(), coeff[l].end());
    for (std::size_t k = 0; k < n; ++k) {
      if (coeff[l][k] < kModeFloor * cmax) continue;
      const double ratio = coeff[l + 1][k] / coeff[l][k];
      worst = std::max(worst, std::abs(ratio - r.growth_factors[k]) / r.growth_factors[k]);
    }
  }
  r.max_relative_deviation = worst;

  const double K = a2 * in.sigma2 + b2;
  const double delta0 = in.sigma2 * in.sigma2 / static_cast<double>(x.cols()) * proj;
  const auto tr = traces(seq);
  for (std::size_t l = 0; l < tr.size(); ++l) {
    const double bound = std::pow(K, static_cast<double>(l)) * delta0;
    r.bound_margins.push_back((tr[l] - bound) / bound);
  }
  r.pass = worst < kEqualityTol && all_nonnegative(r.bound_margins);
  r.message = fmt("max relative mode-growth deviation %.3g, growth factor of the top mode %.6g", worst, K);
  return r;
}

VerificationReport tanh_decay(const Graph& g, const NormalizedAdjacency& a_hat, const DenseMatrix& x,
                              const TheoremInput& in) {
  VerificationReport r;
  r.theorem = TheoremId::T6Tanh;
  const auto seq = nngp_vanilla(a_hat, x, in.sigma2, Activation::tanh(), in.depth, KernelMethod::default_for(Activation::tanh()));
  check_saturation(seq);
  const auto tr = traces(seq);
  decay_margins(tr, in.sigma2, r);
  r.pass = all_nonnegative(r.per_layer_margins);
  if (in.sigma2 < 1.0) {
    const auto m = nngp_metrics(seq.states, g, a_hat, in.num_classes, squared_norm(x));
    const double c0 = static_cast<double>(in.num_classes) / static_cast<double>(x.cols());
    for (std::size_t l = 0; l < m.fsp.size(); ++l) {
      const double bound = c0 * std::pow(in.sigma2, static_cast<double>(l + 1));
      r.bound_margins.push_back((bound - m.fsp[l]) / bound);
    }
    r.pass = r.pass && all_nonnegative(r.bound_margins);
    r.message = r.pass ? "per-layer decay and FSP bound hold" : "inequality violated";
  } else {
    r.hypothesis_met = false;
    r.message = fmt("theorem hypothesis unmet: sigma2 = %.6g is not below 1; only the per-layer inequality is checked",
                    in.sigma2);
  }
  return r;
}

}  // namespace

std::string to_string(TheoremId id) {
  switch (id) {
    case TheoremId::T1Decay: return "t1";
    case TheoremId::T2ScaleInvariance: return "t2";
    case TheoremId::T3Modes: return "t3";
    case TheoremId::T5AbRelu: return "t5";
    case TheoremId::T6Tanh: return "t6";
  }
  return "?";
}

TheoremId parse_theorem(const std::string& name) {
  for (auto id : {TheoremId::T1Decay, TheoremId::T2ScaleInvariance, TheoremId::T3Modes, TheoremId::T5AbRelu,
                  TheoremId::T6Tanh})
    if (to_string(id) == name) return id;
  throw ValidationError("unknown theorem '" + name + "' (expected t1, t2, t3, t5 or t6)");
}

VerificationReport verify_theorem(TheoremId id, const Graph& g, const DenseMatrix& x, const TheoremInput& in) {
  if (g.num_nodes() > 256) throw ValidationError("theorem verification is limited to graphs with n <= 256");
  if (x.rows() != g.num_nodes()) throw ValidationError("features have the wrong number of rows");
  if (!(in.sigma2 > 0.0)) throw ValidationError("sigma2 must be positive");
  if (in.depth < 2) throw ValidationError("theorem verification needs depth >= 2");
  if (in.num_classes < 1) throw ValidationError("num_classes must be >= 1");
  if (squared_norm(x) <= 0.0) throw ValidationError("features are all zero");
  const auto a_hat = normalized_adjacency(g);
  switch (id) {
    case TheoremId::T1Decay:
    case TheoremId::T5AbRelu: return relu_decay(id, g, a_hat, x, in);
    case TheoremId::T2ScaleInvariance: return scale_invariance(a_hat, x, in);
    case TheoremId::T3Modes: return modes(a_hat, x, in);
    case TheoremId::T6Tanh: return tanh_decay(g, a_hat, x, in);
  }
  throw ValidationError("unknown theorem");
}

}  // namespace spog
