#pragma once

#include <cstdint>
#include <vector>

#include "spog/gcn.hpp"
#include "spog/graph.hpp"
#include "spog/model.hpp"

namespace spog {

struct TrainConfig {
  double lr = 0.005;
  std::size_t epochs = 800;
  double weight_decay = 5e-4;
  double dropout_rate = 0.5;
  std::size_t patience = 200;  // epochs without a validation-accuracy gain
  std::uint64_t seed = 0;

  /// Epoch budget by depth: 800/200 up to 16 layers, 1200/300 at 32, 1500/375 beyond.
  static TrainConfig defaults_for_depth(std::size_t depth);
  void validate() const;
};

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  ModelParams m;
  ModelParams v;
  std::size_t t = 0;

  /// Zero moments shaped like `params`.
  static AdamState for_params(const ModelParams& params);
};

/// One bias-corrected Adam update with L2 weight decay added to the gradient.
/// Throws NumericError naming the tensor when a gradient is not finite.
void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state, double lr, double weight_decay,
               const AdamOptions& opts = {});

struct TrainResult {
  std::vector<double> train_loss;
  std::vector<double> train_acc;
  std::vector<double> val_loss;
  std::vector<double> val_acc;
  std::size_t best_val_epoch = 0;
  double best_val_acc = 0.0;
  double test_acc = 0.0;  // at the best-validation parameters
  std::size_t epochs_run = 0;
  bool diverged = false;
  std::size_t diverged_epoch = 0;
  ModelParams best_params;
};

/// Full-graph training on the train mask with early stopping on validation accuracy.
TrainResult train(const ModelSpec& spec, ModelParams params, const Dataset& ds, const TrainConfig& cfg);

}  // namespace spog
