#include "spog/gcn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "spog/error.hpp"
#include "spog/rng.hpp"

namespace spog {

// ---- Activation -------------------------------------------------------------

Activation Activation::ab_relu(double alpha, double beta) {
  if (!(alpha >= 0.0) || !(beta >= 0.0) || (alpha == 0.0 && beta == 0.0))
    throw ValidationError("ab_relu needs alpha, beta >= 0, not both zero");
  return {Kind::AbRelu, alpha, beta};
}

double Activation::operator()(double x) const {
  switch (kind) {
    case Kind::Relu: return x >= 0.0 ? x : 0.0;
    case Kind::Tanh: return std::tanh(x);
    case Kind::Identity: return x;
    case Kind::AbRelu: return x >= 0.0 ? alpha * x : beta * x;
  }
  return x;
}

double Activation::derivative(double x) const {
  switch (kind) {
    case Kind::Relu: return x >= 0.0 ? 1.0 : 0.0;
    case Kind::Tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case Kind::Identity: return 1.0;
    case Kind::AbRelu: return x >= 0.0 ? alpha : beta;
  }
  return 1.0;
}

double Activation::slope_pos() const {
  switch (kind) {
    case Kind::Relu: return 1.0;
    case Kind::AbRelu: return alpha;
    case Kind::Identity: return 1.0;
    case Kind::Tanh: break;
  }
  throw ValidationError("tanh is not ReLU-like");
}

double Activation::slope_neg() const {
  switch (kind) {
    case Kind::Relu: return 0.0;
    case Kind::AbRelu: return beta;
    case Kind::Identity: return 1.0;
    case Kind::Tanh: break;
  }
  throw ValidationError("tanh is not ReLU-like");
}

std::string Activation::name() const {
  switch (kind) {
    case Kind::Relu: return "relu";
    case Kind::Tanh: return "tanh";
    case Kind::Identity: return "identity";
    case Kind::AbRelu: return "ab_relu";
  }
  return "?";
}

Activation parse_activation(const std::string& name, double alpha, double beta) {
  if (name == "relu") return Activation::relu();
  if (name == "tanh") return Activation::tanh();
  if (name == "identity") return Activation::identity();
  if (name == "ab_relu") return Activation::ab_relu(alpha, beta);
  throw ValidationError("unknown activation: " + name);
}

// ---- ModelSpec / ModelParams ------------------------------------------------

std::string to_string(Arch arch) {
  switch (arch) {
    case Arch::Vanilla: return "vanilla";
    case Arch::Res: return "res";
    case Arch::GatRes: return "gat_res";
  }
  return "?";
}

Arch parse_arch(const std::string& name) {
  if (name == "vanilla") return Arch::Vanilla;
  if (name == "res") return Arch::Res;
  if (name == "gat_res") return Arch::GatRes;
  throw ValidationError("unknown architecture: " + name);
}

std::pair<std::size_t, std::size_t> ModelSpec::layer_shape(std::size_t l) const {
  if (has_skip(arch)) return {hidden_dim, hidden_dim};
  const std::size_t in = l == 1 ? input_dim : hidden_dim;
  const std::size_t out = l == depth ? num_classes : hidden_dim;
  return {in, out};
}

void ModelSpec::validate() const {
  if (depth < 1) throw ValidationError("model depth must be >= 1");
  if (input_dim < 1) throw ValidationError("model input_dim must be >= 1");
  if (num_classes < 2) throw ValidationError("model num_classes must be >= 2");
  if ((depth > 1 || has_skip(arch)) && hidden_dim < 1) throw ValidationError("model hidden_dim must be >= 1");
  if (activation.kind == Activation::Kind::AbRelu) Activation::ab_relu(activation.alpha, activation.beta);
}

ModelParams ModelParams::zeros_like(const ModelSpec& spec) {
  spec.validate();
  ModelParams p;
  for (std::size_t l = 1; l <= spec.depth; ++l) {
    const auto [fi, fo] = spec.layer_shape(l);
    p.weights.emplace_back(fi, fo);
    p.biases.emplace_back(fo, 0.0);
  }
  if (has_skip(spec.arch)) {
    p.input_proj = DenseMatrix(spec.input_dim, spec.hidden_dim);
    p.output_proj = DenseMatrix(spec.hidden_dim, spec.num_classes);
  }
  if (spec.arch == Arch::GatRes) {
    p.gate_alpha.assign(spec.depth, 1.0);
    p.gate_beta.assign(spec.depth, 1.0);
  }
  return p;
}

std::size_t ModelParams::num_scalars() const {
  std::size_t n = input_proj.size() + output_proj.size() + gate_alpha.size() + gate_beta.size();
  for (const auto& w : weights) n += w.size();
  for (const auto& b : biases) n += b.size();
  return n;
}

std::size_t count_parameters(const ModelSpec& spec) {
  spec.validate();
  std::size_t n = 0;
  for (std::size_t l = 1; l <= spec.depth; ++l) {
    const auto [fi, fo] = spec.layer_shape(l);
    n += fi * fo + fo;
  }
  if (has_skip(spec.arch)) n += spec.input_dim * spec.hidden_dim + spec.hidden_dim * spec.num_classes;
  if (spec.arch == Arch::GatRes) n += 2 * spec.depth;
  return n;
}

// ---- forward / backward -----------------------------------------------------

namespace {

enum Purpose : std::uint64_t { kDropout = 21 };

void add_bias(DenseMatrix& h, const std::vector<double>& b) {
  for (std::size_t i = 0; i < h.rows(); ++i) {
    auto r = h.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += b[j];
  }
}

DenseMatrix dropout_mask(std::size_t rows, std::size_t cols, const DropoutConfig& cfg, std::size_t layer) {
  RngStream rng(cfg.seed, stream_id(kDropout, cfg.step, layer));
  const double keep_scale = 1.0 / (1.0 - cfg.rate);
  DenseMatrix m(rows, cols);
  for (double& x : m.data()) x = rng.uniform() < cfg.rate ? 0.0 : keep_scale;
  return m;
}

std::pair<double, double> mixing(const ModelSpec& spec, const ModelParams& params, std::size_t l) {
  if (spec.arch == Arch::GatRes) return {params.gate_alpha[l - 1], params.gate_beta[l - 1]};
  return {spec.res_alpha, spec.res_beta};
}

double log10_sq_norm(const DenseMatrix& m) {
  const double f = frobenius_norm(m);
  return f > 0.0 ? 2.0 * std::log10(f) : -std::numeric_limits<double>::infinity();
}

void check_shapes(const ModelSpec& spec, const ModelParams& params, const NormalizedAdjacency& a_hat,
                  const DenseMatrix& x) {
  spec.validate();
  if (a_hat.rows != x.rows() || a_hat.cols != x.rows())
    throw ValidationError("forward: adjacency is " + std::to_string(a_hat.rows) + "x" + std::to_string(a_hat.cols) +
                          " but features have " + std::to_string(x.rows()) + " rows");
  if (x.cols() != spec.input_dim)
    throw ValidationError("forward: features have " + std::to_string(x.cols()) + " columns, model expects " +
                          std::to_string(spec.input_dim));
  if (params.weights.size() != spec.depth || params.biases.size() != spec.depth)
    throw ValidationError("forward: parameter depth does not match the model");
  for (std::size_t l = 1; l <= spec.depth; ++l) {
    const auto [fi, fo] = spec.layer_shape(l);
    if (params.weights[l - 1].rows() != fi || params.weights[l - 1].cols() != fo || params.biases[l - 1].size() != fo)
      throw ValidationError("forward: layer " + std::to_string(l) + " has the wrong shape");
  }
  if (has_skip(spec.arch)) {
    if (params.input_proj.rows() != spec.input_dim || params.input_proj.cols() != spec.hidden_dim ||
        params.output_proj.rows() != spec.hidden_dim || params.output_proj.cols() != spec.num_classes)
      throw ValidationError("forward: projection shapes do not match the model");
  }
  if (spec.arch == Arch::GatRes && (params.gate_alpha.size() != spec.depth || params.gate_beta.size() != spec.depth))
    throw ValidationError("forward: gate count does not match depth");
}

}  // namespace

const DenseMatrix& ForwardTrace::deep_embedding(Arch arch) const {
  return has_skip(arch) ? post_activations.back() : pre_activations.back();
}

ForwardTrace forward(const ModelSpec& spec, const ModelParams& params, const NormalizedAdjacency& a_hat,
                     const DenseMatrix& x, const std::optional<DropoutConfig>& dropout) {
  check_shapes(spec, params, a_hat, x);
  if (dropout && !(dropout->rate >= 0.0 && dropout->rate < 1.0))
    throw ValidationError("dropout rate must lie in [0, 1)");
  const bool use_dropout = dropout && dropout->rate > 0.0;
  const std::size_t L = spec.depth;
  const auto& act = spec.activation;

  ForwardTrace t;
  t.input = x;
  t.input_embedding = has_skip(spec.arch) ? matmul(x, params.input_proj) : x;
  check_finite(t.input_embedding, "input projection");

  const DenseMatrix* prev = &t.input_embedding;
  for (std::size_t l = 1; l <= L; ++l) {
    t.aggregated.push_back(spmm(a_hat, *prev));
    DenseMatrix h = matmul(t.aggregated.back(), params.weights[l - 1]);
    add_bias(h, params.biases[l - 1]);
    if (!all_finite(h)) throw NumericError("non-finite pre-activation at layer " + std::to_string(l));
    t.log10_sq_norms.push_back(log10_sq_norm(h));

    const bool last = l == L;
    if (!has_skip(spec.arch) && last) {
      t.pre_activations.push_back(std::move(h));
      break;
    }
    DenseMatrix xl = map(h, [&](double v) { return act(v); });
    if (has_skip(spec.arch)) {
      const auto [a, b] = mixing(spec, params, l);
      xl *= a;
      const auto src = prev->data();
      auto dst = xl.data();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += b * src[k];
    }
    if (use_dropout && !last) {
      t.dropout_masks.push_back(dropout_mask(xl.rows(), xl.cols(), *dropout, l));
      xl = hadamard(xl, t.dropout_masks.back());
    } else {
      t.dropout_masks.emplace_back();
    }
    if (!all_finite(xl)) throw NumericError("non-finite activation at layer " + std::to_string(l));
    t.pre_activations.push_back(std::move(h));
    t.post_activations.push_back(std::move(xl));
    prev = &t.post_activations.back();
  }

  if (has_skip(spec.arch)) {
    t.logits = matmul(t.post_activations.back(), params.output_proj);
  } else {
    t.logits = t.pre_activations.back();
  }
  if (!all_finite(t.logits)) throw NumericError("non-finite logits");
  return t;
}

double softmax_cross_entropy(const DenseMatrix& logits, std::span<const std::size_t> labels,
                             std::span<const std::size_t> mask) {
  if (mask.empty()) throw ValidationError("loss: empty mask");
  CompensatedSum s;
  for (std::size_t i : mask) {
    auto r = logits.row(i);
    const double m = *std::max_element(r.begin(), r.end());
    double z = 0.0;
    for (double v : r) z += std::exp(v - m);
    s.add(m + std::log(z) - r[labels[i]]);
  }
  return s.value() / static_cast<double>(mask.size());
}

BackwardResult loss_and_backward(const ModelSpec& spec, const ModelParams& params, const NormalizedAdjacency& a_hat,
                                 const ForwardTrace& trace, std::span<const std::size_t> labels,
                                 std::span<const std::size_t> mask) {
  if (mask.empty()) throw ValidationError("loss: empty mask");
  const std::size_t L = spec.depth;
  const std::size_t n = trace.logits.rows();
  const std::size_t C = trace.logits.cols();
  const auto& act = spec.activation;

  BackwardResult out;
  out.loss = softmax_cross_entropy(trace.logits, labels, mask);
  out.grads = ModelParams::zeros_like(spec);
  out.hidden_grads.resize(L);

  DenseMatrix g_logits(n, C);
  const double inv = 1.0 / static_cast<double>(mask.size());
  for (std::size_t i : mask) {
    auto r = trace.logits.row(i);
    const double m = *std::max_element(r.begin(), r.end());
    double z = 0.0;
    for (double v : r) z += std::exp(v - m);
    for (std::size_t c = 0; c < C; ++c) g_logits(i, c) += std::exp(r[c] - m) / z * inv;
    g_logits(i, labels[i]) -= inv;
  }

  auto bias_grad = [](const DenseMatrix& g) {
    std::vector<double> b(g.cols(), 0.0);
    for (std::size_t i = 0; i < g.rows(); ++i)
      for (std::size_t j = 0; j < g.cols(); ++j) b[j] += g(i, j);
    return b;
  };

  if (!has_skip(spec.arch)) {
    DenseMatrix g_h = std::move(g_logits);
    for (std::size_t l = L; l >= 1; --l) {
      out.grads.weights[l - 1] = matmul_tn(trace.aggregated[l - 1], g_h);
      out.grads.biases[l - 1] = bias_grad(g_h);
      if (l > 1) {
        DenseMatrix g_x = spmm(a_hat, matmul_nt(g_h, params.weights[l - 1]));
        if (!trace.dropout_masks[l - 2].empty()) g_x = hadamard(g_x, trace.dropout_masks[l - 2]);
        const DenseMatrix& h_prev = trace.pre_activations[l - 2];
        auto gd = g_x.data();
        auto hd = h_prev.data();
        for (std::size_t k = 0; k < gd.size(); ++k) gd[k] *= act.derivative(hd[k]);
        out.hidden_grads[l - 1] = std::move(g_h);
        g_h = std::move(g_x);
      } else {
        out.hidden_grads[l - 1] = std::move(g_h);
      }
    }
    return out;
  }

  out.grads.output_proj = matmul_tn(trace.post_activations.back(), g_logits);
  DenseMatrix g_x = matmul_nt(g_logits, params.output_proj);
  for (std::size_t l = L; l >= 1; --l) {
    if (!trace.dropout_masks[l - 1].empty()) g_x = hadamard(g_x, trace.dropout_masks[l - 1]);
    const DenseMatrix& h = trace.pre_activations[l - 1];
    const DenseMatrix& x_prev = l == 1 ? trace.input_embedding : trace.post_activations[l - 2];
    const auto [a, b] = mixing(spec, params, l);

    DenseMatrix g_h(h.rows(), h.cols());
    CompensatedSum ga, gb;
    {
      auto gh = g_h.data();
      auto gx = g_x.data();
      auto hd = h.data();
      auto xp = x_prev.data();
      for (std::size_t k = 0; k < gh.size(); ++k) {
        gh[k] = a * gx[k] * act.derivative(hd[k]);
        ga.add(gx[k] * act(hd[k]));
        gb.add(gx[k] * xp[k]);
      }
    }
    if (spec.arch == Arch::GatRes) {
      out.grads.gate_alpha[l - 1] = ga.value();
      out.grads.gate_beta[l - 1] = gb.value();
    }
    out.grads.weights[l - 1] = matmul_tn(trace.aggregated[l - 1], g_h);
    out.grads.biases[l - 1] = bias_grad(g_h);
    DenseMatrix through_conv = spmm(a_hat, matmul_nt(g_h, params.weights[l - 1]));
    g_x *= b;
    g_x += through_conv;
    out.hidden_grads[l - 1] = std::move(g_h);
  }
  out.grads.input_proj = matmul_tn(trace.input, g_x);
  return out;
}

std::vector<std::size_t> predict(const DenseMatrix& logits) {
  std::vector<std::size_t> y(logits.rows());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    auto r = logits.row(i);
    y[i] = static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
  }
  return y;
}

double accuracy(const DenseMatrix& logits, std::span<const std::size_t> labels, std::span<const std::size_t> mask) {
  if (mask.empty()) throw ValidationError("accuracy: empty mask");
  const auto y = predict(logits);
  std::size_t hit = 0;
  for (std::size_t i : mask) hit += y[i] == labels[i];
  return static_cast<double>(hit) / static_cast<double>(mask.size());
}

double evaluate(const ModelSpec& spec, const ModelParams& params, const NormalizedAdjacency& a_hat, const Dataset& ds,
                std::span<const std::size_t> mask) {
  const auto trace = forward(spec, params, a_hat, ds.features);
  return accuracy(trace.logits, ds.labels, mask);
}

}  // namespace spog
