#include <doctest.h>

#include <cmath>

#include "spog/error.hpp"
#include "spog/gcn.hpp"
#include "spog/init.hpp"

using namespace spog;

namespace {

const Graph kPath3(3, {{0, 1}, {1, 2}});
const DenseMatrix kX = DenseMatrix::from_rows({{1, 0.5}, {-0.3, 2}, {0.7, -1}});
const DenseMatrix kW1 = DenseMatrix::from_rows({{0.2, -0.4, 0.1}, {0.5, 0.3, -0.2}});
const DenseMatrix kW2 = DenseMatrix::from_rows({{0.3, -0.2}, {-0.1, 0.4}, {0.6, 0.2}});
const std::vector<std::size_t> kLabels = {0, 1, 0};
const std::vector<std::size_t> kAll = {0, 1, 2};

ModelSpec small_spec(Arch arch, Activation act, std::size_t depth, std::size_t d0, std::size_t d, std::size_t c) {
  ModelSpec s;
  s.arch = arch;
  s.activation = act;
  s.depth = depth;
  s.input_dim = d0;
  s.hidden_dim = d;
  s.num_classes = c;
  return s;
}

double loss_at(const ModelSpec& spec, const ModelParams& p, const NormalizedAdjacency& a, const DenseMatrix& x,
               const std::vector<std::size_t>& y, const std::vector<std::size_t>& mask) {
  return softmax_cross_entropy(forward(spec, p, a, x).logits, y, mask);
}

}  // namespace

TEST_CASE("vanilla forward and loss match a numpy oracle") {
  auto spec = small_spec(Arch::Vanilla, Activation::relu(), 2, 2, 3, 2);
  auto p = ModelParams::zeros_like(spec);
  p.weights = {kW1, kW2};
  p.biases = {{0.1, 0.0, -0.1}, {0.0, 0.05}};
  const auto a = normalized_adjacency(kPath3);
  const auto t = forward(spec, p, a, kX);
  const double oracle[] = {0.15298885851622465,  -0.023836110821819537, 0.16195612135085238,
                           -0.03444509441473596, 0.10048885851622465,   -0.01633611082181953};
  for (std::size_t k = 0; k < 6; ++k) CHECK(t.logits.data()[k] == doctest::Approx(oracle[k]).epsilon(1e-14));
  CHECK(softmax_cross_entropy(t.logits, kLabels, kAll) == doctest::Approx(0.6804131575520828).epsilon(1e-14));
}

TEST_CASE("skip forward matches a numpy oracle") {
  auto spec = small_spec(Arch::Res, Activation::tanh(), 2, 2, 3, 2);
  spec.res_alpha = 0.7;
  spec.res_beta = 1.1;
  auto p = ModelParams::zeros_like(spec);
  p.input_proj = kW1;
  p.weights = {DenseMatrix::from_rows({{0.1, 0.2, -0.3}, {0.4, -0.1, 0.2}, {0.0, 0.3, 0.1}}),
               DenseMatrix::from_rows({{-0.2, 0.1, 0.3}, {0.2, 0.2, -0.1}, {0.1, -0.3, 0.2}})};
  p.output_proj = kW2;
  const auto t = forward(spec, p, normalized_adjacency(kPath3), kX);
  const double oracle[] = {0.1584974993624156,   -0.1667484429340227, -0.10618928463519058,
                           0.06944590162497294, 0.11294039254881852, -0.10257772100545683};
  for (std::size_t k = 0; k < 6; ++k) CHECK(t.logits.data()[k] == doctest::Approx(oracle[k]).epsilon(1e-14));
}

TEST_CASE("definition collapses") {
  // one identity layer with W = I gives A_hat X
  auto spec = small_spec(Arch::Vanilla, Activation::identity(), 1, 2, 4, 2);
  auto p = ModelParams::zeros_like(spec);
  p.weights = {DenseMatrix::identity(2)};
  const auto a = normalized_adjacency(kPath3);
  const auto t = forward(spec, p, a, kX);
  const auto ax = spmm(a, kX);
  for (std::size_t k = 0; k < 6; ++k) CHECK(t.logits.data()[k] == doctest::Approx(ax.data()[k]).epsilon(1e-15));

  // 2-node path with opposite features cancels
  auto spec1 = small_spec(Arch::Vanilla, Activation::identity(), 1, 1, 4, 2);
  auto p1 = ModelParams::zeros_like(spec1);
  p1.weights = {DenseMatrix::from_rows({{1.0, 1.0}})};
  const auto t1 = forward(spec1, p1, normalized_adjacency(Graph(2, {{0, 1}})), DenseMatrix::from_rows({{1}, {-1}}));
  CHECK(t1.logits(0, 0) == doctest::Approx(0.0).scale(1.0));
  CHECK(t1.logits(1, 1) == doctest::Approx(0.0).scale(1.0));

  // zero hidden weights leave only the skip path
  auto rspec = small_spec(Arch::Res, Activation::relu(), 3, 2, 3, 2);
  auto rp = ModelParams::zeros_like(rspec);
  rp.input_proj = kW1;
  rp.output_proj = kW2;
  const auto rt = forward(rspec, rp, a, kX);
  CHECK(rt.post_activations.back() == rt.input_embedding);
}

TEST_CASE("shape mismatches and non-finite values are rejected") {
  auto spec = small_spec(Arch::Vanilla, Activation::relu(), 2, 2, 3, 2);
  auto p = ModelParams::zeros_like(spec);
  const auto a = normalized_adjacency(kPath3);
  CHECK_THROWS_AS(forward(spec, p, a, DenseMatrix(3, 5)), ValidationError);
  p.weights[1](0, 0) = std::numeric_limits<double>::infinity();
  p.weights[0](0, 0) = 1.0;
  CHECK_THROWS_WITH_AS(forward(spec, p, a, kX), doctest::Contains("layer 2"), NumericError);
}

TEST_CASE("uniform logits give ln C") {
  DenseMatrix z(4, 3, 0.25);
  const std::vector<std::size_t> y = {0, 1, 2, 0};
  const std::vector<std::size_t> m = {0, 1, 2, 3};
  CHECK(softmax_cross_entropy(z, y, m) == doctest::Approx(std::log(3.0)).epsilon(1e-15));
  CHECK_THROWS_AS(softmax_cross_entropy(z, y, {}), ValidationError);
}

TEST_CASE("predictions break ties toward the lowest class") {
  const DenseMatrix z(5, 3);
  CHECK(predict(z) == std::vector<std::size_t>(5, 0));
  const std::vector<std::size_t> y = {0, 1, 2, 0, 1};
  const std::vector<std::size_t> m = {0, 1, 2, 3, 4};
  CHECK(accuracy(z, y, m) == doctest::Approx(0.4));
  DenseMatrix onehot(5, 3);
  for (std::size_t i = 0; i < 5; ++i) onehot(i, y[i]) = 1.0;
  CHECK(accuracy(onehot, y, m) == 1.0);
}

TEST_CASE("backprop matches central differences for every parameter") {
  const Graph g(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {0, 3}});
  const auto a = normalized_adjacency(g);
  RngStream rng(4, 0);
  DenseMatrix x(6, 3);
  for (double& v : x.data()) v = rng.normal();
  const std::vector<std::size_t> y = {0, 1, 1, 0, 1, 0};
  const std::vector<std::size_t> mask = {0, 2, 3, 5};

  for (Arch arch : {Arch::Vanilla, Arch::Res, Arch::GatRes})
    for (Activation act : {Activation::relu(), Activation::tanh()}) {
      CAPTURE(to_string(arch));
      CAPTURE(act.name());
      auto spec = small_spec(arch, act, 3, 3, 5, 2);
      spec.res_alpha = 0.8;
      spec.res_beta = 0.9;
      auto p = initialize_params(spec, InitScheme::of(InitFamily::Kaiming, 3));
      p.for_each_scalar([&](double& v) { v += 0.05 * rng.normal(); });
      const auto back = loss_and_backward(spec, p, a, forward(spec, p, a, x), y, mask);

      std::vector<double*> params;
      std::vector<double> grads;
      p.for_each_scalar([&](double& v) { params.push_back(&v); });
      auto gcopy = back.grads;
      gcopy.for_each_scalar([&](double& v) { grads.push_back(v); });
      REQUIRE(params.size() == grads.size());
      double worst = 0.0;
      for (std::size_t k = 0; k < params.size(); ++k) {
        const double keep = *params[k];
        const double eps = 1e-5;
        *params[k] = keep + eps;
        const double up = loss_at(spec, p, a, x, y, mask);
        *params[k] = keep - eps;
        const double down = loss_at(spec, p, a, x, y, mask);
        *params[k] = keep;
        const double fd = (up - down) / (2 * eps);
        worst = std::max(worst, std::abs(fd - grads[k]) / std::max(1e-3, std::abs(fd) + std::abs(grads[k])));
      }
      CHECK(worst < 1e-4);
    }
}

TEST_CASE("weight gradients factor through the aggregated hidden gradient") {
  const Graph g(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}});
  const auto a = normalized_adjacency(g);
  RngStream rng(8, 0);
  DenseMatrix x(6, 3);
  for (double& v : x.data()) v = rng.normal();
  const std::vector<std::size_t> y = {0, 1, 1, 0, 1, 0};
  const std::vector<std::size_t> mask = {0, 1, 2, 3, 4, 5};
  for (Activation act : {Activation::relu(), Activation::tanh()}) {
    auto spec = small_spec(Arch::Vanilla, act, 4, 3, 5, 2);
    const auto p = initialize_params(spec, InitScheme::of(InitFamily::Xavier, 1));
    const auto t = forward(spec, p, a, x);
    const auto back = loss_and_backward(spec, p, a, t, y, mask);
    for (std::size_t l = 1; l <= 4; ++l) {
      const DenseMatrix& prev = l == 1 ? t.input : t.post_activations[l - 2];
      const auto rebuilt = matmul_tn(prev, spmm(a, back.hidden_grads[l - 1]));
      const double scale = max_abs(back.grads.weights[l - 1]);
      for (std::size_t k = 0; k < rebuilt.size(); ++k)
        CHECK(std::abs(rebuilt.data()[k] - back.grads.weights[l - 1].data()[k]) <= 1e-10 * scale);
    }
  }
}

TEST_CASE("one layer scales with its weights for ReLU-like activations") {
  const auto a = normalized_adjacency(kPath3);
  auto spec = small_spec(Arch::Vanilla, Activation::ab_relu(1.0, 0.3), 3, 2, 4, 2);
  const auto p = initialize_params(spec, InitScheme::of(InitFamily::Kaiming, 2));
  const auto base = forward(spec, p, a, kX);
  for (std::size_t l = 1; l <= 3; ++l) {
    std::vector<double> gamma(3, 1.0);
    gamma[l - 1] = 2.5;
    const auto t = forward(spec, apply_scales(p, gamma), a, kX);
    for (std::size_t k = 0; k < t.pre_activations[l - 1].size(); ++k)
      CHECK(t.pre_activations[l - 1].data()[k] ==
            doctest::Approx(2.5 * base.pre_activations[l - 1].data()[k]).epsilon(1e-13));
  }
}

TEST_CASE("dropout masks are inverted and seeded") {
  const Graph g(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}});
  const auto a = normalized_adjacency(g);
  DenseMatrix x(6, 3, 1.0);
  auto spec = small_spec(Arch::Vanilla, Activation::tanh(), 3, 3, 40, 2);
  const auto p = initialize_params(spec, InitScheme::of(InitFamily::Xavier, 1));
  const auto t1 = forward(spec, p, a, x, DropoutConfig{0.5, 9, 0});
  const auto t2 = forward(spec, p, a, x, DropoutConfig{0.5, 9, 0});
  const auto t3 = forward(spec, p, a, x, DropoutConfig{0.5, 9, 1});
  CHECK(t1.logits == t2.logits);
  CHECK(t1.dropout_masks[0] != t3.dropout_masks[0]);
  for (double v : t1.dropout_masks[0].data()) CHECK((v == 0.0 || v == 2.0));
  const auto clean = forward(spec, p, a, x);
  for (const auto& m : clean.dropout_masks) CHECK(m.empty());
}
