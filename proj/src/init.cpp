#include "spog/init.hpp"

#include <cmath>

#include "spog/error.hpp"

namespace spog {

std::string to_string(InitFamily f) {
  switch (f) {
    case InitFamily::LeCun: return "lecun";
    case InitFamily::Kaiming: return "kaiming";
    case InitFamily::Xavier: return "xavier";
    case InitFamily::Conventional: return "conventional";
    case InitFamily::CustomSigma: return "custom";
  }
  return "?";
}

InitFamily parse_init_family(const std::string& name) {
  if (name == "lecun") return InitFamily::LeCun;
  if (name == "kaiming") return InitFamily::Kaiming;
  if (name == "xavier") return InitFamily::Xavier;
  if (name == "conventional") return InitFamily::Conventional;
  if (name == "custom") return InitFamily::CustomSigma;
  throw ValidationError("unknown init family: " + name);
}

std::string to_string(WeightDistribution d) { return d == WeightDistribution::Normal ? "normal" : "uniform"; }

WeightDistribution parse_distribution(const std::string& name) {
  if (name == "normal") return WeightDistribution::Normal;
  if (name == "uniform") return WeightDistribution::Uniform;
  throw ValidationError("unknown weight distribution: " + name);
}

WeightDistribution InitScheme::resolved_distribution() const {
  if (distribution) return *distribution;
  return family == InitFamily::Xavier || family == InitFamily::Conventional ? WeightDistribution::Uniform
                                                                             : WeightDistribution::Normal;
}

void InitScheme::validate() const {
  if (family != InitFamily::CustomSigma) return;
  if (sigma2.empty()) throw ValidationError("custom init needs at least one sigma2 value");
  for (double s : sigma2)
    if (!(s > 0.0) || !std::isfinite(s)) throw ValidationError("custom init sigma2 must be positive and finite");
}

double InitScheme::variance(std::size_t fan_in, std::size_t fan_out, std::size_t layer) const {
  if (fan_in == 0 || fan_out == 0) throw ValidationError("init: fan_in and fan_out must be >= 1");
  const auto fi = static_cast<double>(fan_in);
  switch (family) {
    case InitFamily::LeCun: return 1.0 / fi;
    case InitFamily::Kaiming: return 2.0 / fi;
    case InitFamily::Xavier: return 2.0 / (fi + static_cast<double>(fan_out));
    case InitFamily::Conventional: return 1.0 / (3.0 * fi);
    case InitFamily::CustomSigma: {
      validate();
      // Per-layer values cover layers 1..L; projections (0, L+1) use the nearest entry.
      std::size_t idx = 0;
      if (sigma2.size() > 1) idx = std::min(layer == 0 ? 0 : layer - 1, sigma2.size() - 1);
      return sigma2[idx] / fi;
    }
  }
  return 0.0;
}

std::string InitScheme::id() const {
  std::string s = to_string(family) + "-" + to_string(resolved_distribution());
  if (family == InitFamily::CustomSigma && sigma2.size() == 1) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", sigma2[0]);
    s += "-s2=" + std::string(buf);
  }
  return s;
}

DenseMatrix sample_weight(const InitScheme& scheme, std::size_t fan_in, std::size_t fan_out, std::size_t layer,
                          RngStream& rng) {
  const double var = scheme.variance(fan_in, fan_out, layer);
  DenseMatrix w(fan_in, fan_out);
  if (scheme.resolved_distribution() == WeightDistribution::Normal) {
    const double sd = std::sqrt(var);
    for (double& x : w.data()) x = sd * rng.normal();
  } else {
    // U(-a, a) has variance a^2 / 3.
    const double a = std::sqrt(3.0 * var);
    for (double& x : w.data()) x = a * (2.0 * rng.uniform() - 1.0);
  }
  return w;
}

namespace {
enum Tensor : std::uint64_t { kWeight = 11 };
}

ModelParams initialize_params(const ModelSpec& spec, const InitScheme& scheme) {
  spec.validate();
  scheme.validate();
  ModelParams p = ModelParams::zeros_like(spec);
  for (std::size_t l = 1; l <= spec.depth; ++l) {
    const auto [fi, fo] = spec.layer_shape(l);
    RngStream rng(scheme.seed, stream_id(kWeight, l));
    p.weights[l - 1] = sample_weight(scheme, fi, fo, l, rng);
  }
  if (has_skip(spec.arch)) {
    RngStream rin(scheme.seed, stream_id(kWeight, 0));
    p.input_proj = sample_weight(scheme, spec.input_dim, spec.hidden_dim, 0, rin);
    RngStream rout(scheme.seed, stream_id(kWeight, spec.depth + 1));
    p.output_proj = sample_weight(scheme, spec.hidden_dim, spec.num_classes, spec.depth + 1, rout);
  }
  return p;
}

std::size_t num_scales(const ModelSpec& spec) { return has_skip(spec.arch) ? 1 : spec.depth; }

ModelParams apply_scales(const ModelParams& base, const std::vector<double>& gamma) {
  const std::size_t layers = base.weights.size();
  if (gamma.size() != 1 && gamma.size() != layers)
    throw ValidationError("apply_scales: expected 1 or " + std::to_string(layers) + " scale factors, got " +
                          std::to_string(gamma.size()));
  for (double g : gamma)
    if (!(g > 0.0) || !std::isfinite(g)) throw ValidationError("apply_scales: scale factors must be positive");
  ModelParams out = base;
  for (std::size_t l = 0; l < layers; ++l) out.weights[l] *= gamma.size() == 1 ? gamma[0] : gamma[l];
  return out;
}

}  // namespace spog
