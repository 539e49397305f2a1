#include "spog/nngp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>

#include "spog/error.hpp"
#include "spog/rng.hpp"

namespace spog {
namespace {

// (sin t + (pi - t) cos t) / (2 pi) with t = arccos(rho): E[relu(u) relu(v)] for unit variances.
double arccos_j1(double rho) {
  rho = std::clamp(rho, -1.0, 1.0);
  const double t = std::acos(rho);
  return (std::sin(t) + (std::numbers::pi - t) * rho) / (2.0 * std::numbers::pi);
}

const HermiteRule& cached_rule(std::size_t q) {
  static std::mutex mu;
  static std::map<std::size_t, HermiteRule> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(q);
  if (it == cache.end()) it = cache.emplace(q, gauss_hermite_rule(q)).first;
  return it->second;
}

}  // namespace

KernelMethod KernelMethod::default_for(const Activation& act) {
  return act.kind == Activation::Kind::Tanh ? gauss_hermite() : closed_form();
}

void KernelMethod::validate() const {
  if (kind == Kind::GaussHermite && nodes < 8) throw ValidationError("Gauss-Hermite needs at least 8 nodes");
  if (kind == Kind::MonteCarlo && samples < 1000) throw ValidationError("Monte Carlo needs at least 1000 samples");
}

HermiteRule gauss_hermite_rule(std::size_t q) {
  if (q < 1) throw ValidationError("gauss_hermite_rule: q must be >= 1");
  // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite polynomials.
  DenseMatrix jac(q, q);
  for (std::size_t k = 1; k < q; ++k) jac(k - 1, k) = jac(k, k - 1) = std::sqrt(static_cast<double>(k));
  const auto eig = symmetric_eigendecompose(jac);
  HermiteRule rule;
  for (std::size_t k = q; k-- > 0;) {
    rule.nodes.push_back(eig.values[k]);
    rule.weights.push_back(eig.vectors(0, k) * eig.vectors(0, k));
  }
  return rule;
}

double bivariate_expectation(const Activation& act, double s11, double s22, double s12, const KernelMethod& method,
                             std::uint64_t stream) {
  if (!(s11 > 0.0) || !(s22 > 0.0)) return 0.0;
  const double sd1 = std::sqrt(s11);
  const double sd2 = std::sqrt(s22);
  const double rho = std::clamp(s12 / (sd1 * sd2), -1.0, 1.0);

  switch (method.kind) {
    case KernelMethod::Kind::ClosedForm: {
      if (!act.is_relu_like() && act.kind != Activation::Kind::Identity)
        throw ValidationError("closed-form kernel requested for non-ReLU activation " + act.name());
      if (act.kind == Activation::Kind::Identity) return s12;
      // act(x) = a relu(x) - b relu(-x)
      const double a = act.slope_pos();
      const double b = act.slope_neg();
      return sd1 * sd2 * ((a * a + b * b) * arccos_j1(rho) - 2.0 * a * b * arccos_j1(-rho));
    }
    case KernelMethod::Kind::GaussHermite: {
      const auto& rule = cached_rule(method.nodes);
      const std::size_t q = rule.nodes.size();
      if (std::abs(rho) == 1.0) {
        double acc = 0.0;
        for (std::size_t k = 0; k < q; ++k) {
          const double z = rule.nodes[k];
          acc += rule.weights[k] * act(sd1 * z) * act(rho * sd2 * z);
        }
        return acc;
      }
      const double r = std::clamp(rho, -1.0 + 1e-12, 1.0 - 1e-12);
      const double c = std::sqrt(1.0 - r * r);
      double acc = 0.0;
      for (std::size_t a = 0; a < q; ++a) {
        const double z1 = rule.nodes[a];
        const double f1 = act(sd1 * z1);
        double inner = 0.0;
        for (std::size_t b = 0; b < q; ++b) inner += rule.weights[b] * act(sd2 * (r * z1 + c * rule.nodes[b]));
        acc += rule.weights[a] * f1 * inner;
      }
      return acc;
    }
    case KernelMethod::Kind::MonteCarlo: {
      RngStream rng(method.seed, stream);
      const double c = std::sqrt(std::max(0.0, 1.0 - rho * rho));
      CompensatedSum s;
      for (std::size_t k = 0; k < method.samples; ++k) {
        const double z1 = rng.normal();
        const double z2 = rng.normal();
        s.add(act(sd1 * z1) * act(sd2 * (rho * z1 + c * z2)));
      }
      return s.value() / static_cast<double>(method.samples);
    }
  }
  return 0.0;
}

DenseMatrix g_kernel(const DenseMatrix& sigma, const Activation& act, const KernelMethod& method) {
  if (sigma.rows() != sigma.cols()) throw ValidationError("g_kernel: covariance must be square");
  method.validate();
  if (act.kind == Activation::Kind::Identity) return sigma;
  const std::size_t n = sigma.rows();
  DenseMatrix g(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double v = i == j ? bivariate_expectation(act, sigma(i, i), sigma(i, i), sigma(i, i), method, stream_id(i, i))
                              : bivariate_expectation(act, sigma(i, i), sigma(j, j), sigma(i, j), method, stream_id(i, j));
      g(i, j) = g(j, i) = v;
    }
  return g;
}

namespace {

// A S A for symmetric A and S.
DenseMatrix sandwich(const NormalizedAdjacency& a_hat, const DenseMatrix& s) {
  const DenseMatrix as = spmm(a_hat, s);
  DenseMatrix out = transpose(spmm(a_hat, transpose(as)));
  symmetrize(out);
  return out;
}

DenseMatrix first_layer(const NormalizedAdjacency& a_hat, const DenseMatrix& x, double scale) {
  if (a_hat.rows != x.rows()) throw ValidationError("nngp: adjacency and features disagree on n");
  if (x.cols() < 1) throw ValidationError("nngp: features need at least one column");
  const DenseMatrix y = spmm(a_hat, x);
  DenseMatrix s = matmul_nt(y, y);
  s *= scale / static_cast<double>(x.cols());
  symmetrize(s);
  return s;
}

void check_size(const NormalizedAdjacency& a_hat) {
  if (a_hat.rows > 2048) throw ValidationError("nngp: dense covariance limited to n <= 2048");
}

}  // namespace

NngpSequence nngp_vanilla(const NormalizedAdjacency& a_hat, const DenseMatrix& x, double sigma2,
                          const Activation& act, std::size_t depth, const KernelMethod& method) {
  check_size(a_hat);
  if (!(sigma2 > 0.0)) throw ValidationError("nngp: sigma2 must be positive");
  if (depth < 1) throw ValidationError("nngp: depth must be >= 1");
  NngpSequence seq;
  DenseMatrix s = first_layer(a_hat, x, sigma2);
  for (std::size_t l = 1; l <= depth; ++l) {
    if (l > 1) {
      s = sandwich(a_hat, g_kernel(s, act, method));
      s *= sigma2;
    }
    if (!all_finite(s)) {
      seq.saturated = true;
      seq.saturated_at = l;
      break;
    }
    seq.states.push_back({l, s});
  }
  return seq;
}

NngpSequence nngp_linear_resgcn(const NormalizedAdjacency& a_hat, const DenseMatrix& x, double sigma2, double alpha,
                                double beta, std::size_t depth) {
  check_size(a_hat);
  if (!(sigma2 > 0.0)) throw ValidationError("nngp: sigma2 must be positive");
  if (depth < 1) throw ValidationError("nngp: depth must be >= 1");
  NngpSequence seq;
  DenseMatrix s = first_layer(a_hat, x, sigma2 * sigma2);
  for (std::size_t l = 1; l <= depth; ++l) {
    if (l > 1) {
      DenseMatrix next = sandwich(a_hat, s);
      next *= alpha * alpha * sigma2;
      s *= beta * beta;
      s += next;
    }
    if (!all_finite(s)) {
      seq.saturated = true;
      seq.saturated_at = l;
      break;
    }
    seq.states.push_back({l, s});
  }
  return seq;
}

NngpMetrics nngp_metrics(const std::vector<NngpState>& states, const Graph& g, const NormalizedAdjacency& a_hat,
                         std::size_t num_classes, double x_sq_norm, const std::optional<GevSampling>& sampling) {
  if (!(x_sq_norm > 0.0)) throw ValidationError("nngp_metrics: ||X||_F^2 must be positive");
  NngpMetrics m;
  for (const auto& st : states) {
    const double tr = trace(st.cov);
    m.fsp.push_back(static_cast<double>(num_classes) * tr / x_sq_norm);
    // tr(L S) = tr(S) - sum_ij A_ij S_ji
    CompensatedSum tas;
    for (std::size_t i = 0; i < a_hat.rows; ++i)
      for (std::size_t k = a_hat.row_offsets[i]; k < a_hat.row_offsets[i + 1]; ++k)
        tas.add(a_hat.values[k] * st.cov(a_hat.col_indices[k], i));
    if (tr > 0.0) {
      m.gev_proxy.push_back((tr - tas.value()) / tr);
      m.gev_undefined.push_back(0);
    } else {
      m.gev_proxy.push_back(std::numeric_limits<double>::quiet_NaN());
      m.gev_undefined.push_back(1);
    }

    if (sampling) {
      // H = U diag(sqrt(max(lambda, 0))) Z with C i.i.d. standard normal columns.
      const auto eig = symmetric_eigendecompose(st.cov, 1e-8);
      const std::size_t n = st.cov.rows();
      DenseMatrix factor(n, n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) factor(i, k) = eig.vectors(i, k) * std::sqrt(std::max(eig.values[k], 0.0));
      RngStream rng(sampling->seed, stream_id(st.layer));
      CompensatedSum acc;
      std::size_t used = 0;
      for (std::size_t d = 0; d < sampling->draws; ++d) {
        DenseMatrix z(n, num_classes);
        for (double& v : z.data()) v = rng.normal();
        const DenseMatrix h = matmul(factor, z);
        if (squared_norm(h) > 0.0) {
          acc.add(gev(g, h));
          ++used;
        }
      }
      m.gev_sampled.push_back(used ? acc.value() / static_cast<double>(used)
                                   : std::numeric_limits<double>::quiet_NaN());
    }
  }
  return m;
}

}  // namespace spog
