#include "spog/train.hpp"

#include <cmath>

#include "spog/error.hpp"

namespace spog {

TrainConfig TrainConfig::defaults_for_depth(std::size_t depth) {
  TrainConfig c;
  if (depth >= 64) {
    c.epochs = 1500;
    c.patience = 375;
  } else if (depth >= 32) {
    c.epochs = 1200;
    c.patience = 300;
  }
  return c;
}

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw ValidationError("train: lr must be positive");
  if (epochs < 1) throw ValidationError("train: epochs must be >= 1");
  if (!(weight_decay >= 0.0)) throw ValidationError("train: weight_decay must be >= 0");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ValidationError("train: dropout_rate must be in [0, 1)");
  if (patience < 1) throw ValidationError("train: patience must be >= 1");
}

AdamState AdamState::for_params(const ModelParams& params) {
  AdamState s{params, params, 0};
  s.m.for_each_scalar([](double& v) { v = 0.0; });
  s.v.for_each_scalar([](double& v) { v = 0.0; });
  return s;
}

namespace {

void check_grads(const ModelParams& g) {
  for (std::size_t l = 0; l < g.weights.size(); ++l)
    if (!all_finite(g.weights[l])) throw NumericError("non-finite gradient at layer " + std::to_string(l + 1));
  for (std::size_t l = 0; l < g.biases.size(); ++l)
    for (double v : g.biases[l])
      if (!std::isfinite(v)) throw NumericError("non-finite bias gradient at layer " + std::to_string(l + 1));
  if (!all_finite(g.input_proj)) throw NumericError("non-finite gradient at the input projection");
  if (!all_finite(g.output_proj)) throw NumericError("non-finite gradient at the output projection");
  for (std::size_t l = 0; l < g.gate_alpha.size(); ++l)
    if (!std::isfinite(g.gate_alpha[l]) || !std::isfinite(g.gate_beta[l]))
      throw NumericError("non-finite gate gradient at layer " + std::to_string(l + 1));
}

}  // namespace

void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state, double lr, double weight_decay,
               const AdamOptions& opts) {
  if (grads.num_scalars() != params.num_scalars()) throw ValidationError("adam_step: shape mismatch");
  check_grads(grads);
  ++state.t;
  const double c1 = 1.0 - std::pow(opts.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(opts.beta2, static_cast<double>(state.t));
  // Walk params, grads, m and v in the same fixed scalar order.
  std::vector<double*> p, m, v;
  std::vector<double> g;
  params.for_each_scalar([&](double& x) { p.push_back(&x); });
  state.m.for_each_scalar([&](double& x) { m.push_back(&x); });
  state.v.for_each_scalar([&](double& x) { v.push_back(&x); });
  params.zip_scalars(grads, [&](double&, const double& x) { g.push_back(x); });
  if (g.size() != p.size() || m.size() != p.size()) throw ValidationError("adam_step: shape mismatch");
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double gi = g[i] + weight_decay * *p[i];
    *m[i] = opts.beta1 * *m[i] + (1.0 - opts.beta1) * gi;
    *v[i] = opts.beta2 * *v[i] + (1.0 - opts.beta2) * gi * gi;
    *p[i] -= lr * (*m[i] / c1) / (std::sqrt(*v[i] / c2) + opts.eps);
  }
}

TrainResult train(const ModelSpec& spec, ModelParams params, const Dataset& ds, const TrainConfig& cfg) {
  spec.validate();
  cfg.validate();
  if (ds.splits.train.empty() || ds.splits.val.empty()) throw ValidationError("train: empty train or val mask");
  const auto a_hat = normalized_adjacency(ds.graph);
  AdamState state = AdamState::for_params(params);
  TrainResult res;
  res.best_params = params;
  res.best_val_acc = -1.0;

  std::size_t stale = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    try {
      std::optional<DropoutConfig> drop;
      if (cfg.dropout_rate > 0.0) drop = DropoutConfig{cfg.dropout_rate, cfg.seed, epoch};
      const auto trace = forward(spec, params, a_hat, ds.features, drop);
      const auto back = loss_and_backward(spec, params, a_hat, trace, ds.labels, ds.splits.train);
      if (!std::isfinite(back.loss)) throw NumericError("non-finite loss");

      const auto eval = forward(spec, params, a_hat, ds.features);
      res.train_loss.push_back(back.loss);
      res.train_acc.push_back(accuracy(eval.logits, ds.labels, ds.splits.train));
      res.val_loss.push_back(softmax_cross_entropy(eval.logits, ds.labels, ds.splits.val));
      res.val_acc.push_back(accuracy(eval.logits, ds.labels, ds.splits.val));
      res.epochs_run = epoch + 1;
      if (res.val_acc.back() > res.best_val_acc) {
        res.best_val_acc = res.val_acc.back();
        res.best_val_epoch = epoch;
        res.best_params = params;
        stale = 0;
      } else if (++stale >= cfg.patience) {
        break;
      }
      adam_step(params, back.grads, state, cfg.lr, cfg.weight_decay);
    } catch (const NumericError&) {
      res.diverged = true;
      res.diverged_epoch = epoch;
      break;
    }
  }
  if (res.best_val_acc < 0.0) res.best_val_acc = 0.0;
  try {
    res.test_acc = evaluate(spec, res.best_params, a_hat, ds, ds.splits.test.empty() ? ds.splits.val : ds.splits.test);
  } catch (const NumericError&) {
    res.test_acc = 0.0;
    res.diverged = true;
  }
  return res;
}

}  // namespace spog
