#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "spog/linalg.hpp"

namespace spog {

/// Pointwise nonlinearity. `AbRelu` is alpha*x for x >= 0 and beta*x for x < 0;
/// `Relu` is the (1, 0) case.
struct Activation {
  enum class Kind { Relu, Tanh, Identity, AbRelu };

  Kind kind = Kind::Relu;
  double alpha = 1.0;
  double beta = 0.0;

  static Activation relu() { return {Kind::Relu, 1.0, 0.0}; }
  static Activation tanh() { return {Kind::Tanh, 1.0, 0.0}; }
  static Activation identity() { return {Kind::Identity, 1.0, 1.0}; }
  /// Throws ValidationError unless alpha, beta >= 0 and not both zero.
  static Activation ab_relu(double alpha, double beta);

  double operator()(double x) const;
  /// Right derivative at 0.
  double derivative(double x) const;
  /// True for relu and ab_relu (positively 1-homogeneous).
  bool is_relu_like() const { return kind == Kind::Relu || kind == Kind::AbRelu; }
  /// (alpha, beta) of a ReLU-like activation; identity counts as (1, 1).
  double slope_pos() const;
  double slope_neg() const;

  std::string name() const;
  bool operator==(const Activation&) const = default;
};

Activation parse_activation(const std::string& name, double alpha = 1.0, double beta = 0.0);

enum class Arch { Vanilla, Res, GatRes };

std::string to_string(Arch arch);
Arch parse_arch(const std::string& name);
inline bool has_skip(Arch a) { return a != Arch::Vanilla; }

struct ModelSpec {
  Arch arch = Arch::Vanilla;
  double res_alpha = 1.0;  // fixed skip mixing for Res
  double res_beta = 1.0;
  std::size_t depth = 2;        // L graph-convolution layers
  std::size_t input_dim = 1;    // d0
  std::size_t hidden_dim = 16;  // d
  std::size_t num_classes = 2;  // C
  Activation activation = Activation::relu();

  /// (fan_in, fan_out) of graph-convolution layer l in [1, L].
  std::pair<std::size_t, std::size_t> layer_shape(std::size_t l) const;
  /// Throws ValidationError on inconsistent settings.
  void validate() const;
};

/// Weights of one model. Layer l in [1, L] is stored at index l - 1.
/// `input_proj` (d0 x d) and `output_proj` (d x C) exist only for skip
/// architectures; the gates only for GatRes.
struct ModelParams {
  std::vector<DenseMatrix> weights;
  std::vector<std::vector<double>> biases;
  DenseMatrix input_proj;
  DenseMatrix output_proj;
  std::vector<double> gate_alpha;
  std::vector<double> gate_beta;

  /// Zero tensors shaped like `spec`, gates at (1, 1).
  static ModelParams zeros_like(const ModelSpec& spec);
  /// Number of scalar entries over all tensors.
  std::size_t num_scalars() const;
  /// Applies f to each (param, other) scalar pair in a fixed order.
  template <typename F>
  void zip_scalars(const ModelParams& other, F&& f);
  template <typename F>
  void for_each_scalar(F&& f);

  bool operator==(const ModelParams&) const = default;
};

/// Exact trainable-parameter count of `spec`.
std::size_t count_parameters(const ModelSpec& spec);

template <typename F>
void ModelParams::zip_scalars(const ModelParams& other, F&& f) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    auto a = weights[l].data();
    auto b = other.weights[l].data();
    for (std::size_t k = 0; k < a.size(); ++k) f(a[k], b[k]);
  }
  for (std::size_t l = 0; l < biases.size(); ++l)
    for (std::size_t k = 0; k < biases[l].size(); ++k) f(biases[l][k], other.biases[l][k]);
  {
    auto a = input_proj.data();
    auto b = other.input_proj.data();
    for (std::size_t k = 0; k < a.size(); ++k) f(a[k], b[k]);
  }
  {
    auto a = output_proj.data();
    auto b = other.output_proj.data();
    for (std::size_t k = 0; k < a.size(); ++k) f(a[k], b[k]);
  }
  for (std::size_t k = 0; k < gate_alpha.size(); ++k) f(gate_alpha[k], other.gate_alpha[k]);
  for (std::size_t k = 0; k < gate_beta.size(); ++k) f(gate_beta[k], other.gate_beta[k]);
}

template <typename F>
void ModelParams::for_each_scalar(F&& f) {
  zip_scalars(*this, [&](double& a, const double&) { f(a); });
}

}  // namespace spog
