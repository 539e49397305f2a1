#include <doctest.h>

#include <cmath>

#include "spog/error.hpp"
#include "spog/init.hpp"

using namespace spog;

namespace {

double empirical_variance(const DenseMatrix& w) {
  double s = 0.0, s2 = 0.0;
  for (double v : w.data()) {
    s += v;
    s2 += v * v;
  }
  const double n = static_cast<double>(w.size());
  return s2 / n - (s / n) * (s / n);
}

ModelSpec spec_of(Arch arch, std::size_t depth) {
  ModelSpec s;
  s.arch = arch;
  s.depth = depth;
  s.input_dim = 4;
  s.hidden_dim = 8;
  s.num_classes = 3;
  return s;
}

}  // namespace

TEST_CASE("variance rules") {
  CHECK(InitScheme::of(InitFamily::LeCun).variance(50, 10, 1) == doctest::Approx(1.0 / 50));
  CHECK(InitScheme::of(InitFamily::Kaiming).variance(50, 10, 1) == doctest::Approx(2.0 / 50));
  CHECK(InitScheme::of(InitFamily::Xavier).variance(50, 10, 1) == doctest::Approx(2.0 / 60));
  CHECK(InitScheme::of(InitFamily::Conventional).variance(50, 10, 1) == doctest::Approx(1.0 / 150));
  CHECK(InitScheme::custom({0.5}).variance(50, 10, 3) == doctest::Approx(0.5 / 50));
  CHECK(InitScheme::custom({0.5, 2.0}).variance(50, 10, 2) == doctest::Approx(2.0 / 50));
  CHECK_THROWS_AS(InitScheme::custom({}).validate(), ValidationError);
  CHECK_THROWS_AS(InitScheme::custom({-1.0}).validate(), ValidationError);
  CHECK_THROWS_AS(InitScheme::of(InitFamily::LeCun).variance(0, 10, 1), ValidationError);
}

TEST_CASE("default distributions") {
  CHECK(InitScheme::of(InitFamily::Xavier).resolved_distribution() == WeightDistribution::Uniform);
  CHECK(InitScheme::of(InitFamily::Conventional).resolved_distribution() == WeightDistribution::Uniform);
  CHECK(InitScheme::of(InitFamily::Kaiming).resolved_distribution() == WeightDistribution::Normal);
  CHECK(InitScheme::of(InitFamily::LeCun).resolved_distribution() == WeightDistribution::Normal);
  CHECK(parse_init_family("kaiming") == InitFamily::Kaiming);
  CHECK_THROWS_AS(parse_init_family("orthogonal"), ValidationError);
}

TEST_CASE("sampled weights have the target variance") {
  for (auto fam : {InitFamily::LeCun, InitFamily::Kaiming, InitFamily::Xavier, InitFamily::Conventional}) {
    for (auto dist : {WeightDistribution::Normal, WeightDistribution::Uniform}) {
      InitScheme s = InitScheme::of(fam, 9);
      s.distribution = dist;
      RngStream rng(9, 1);
      const auto w = sample_weight(s, 200, 300, 1, rng);
      const double target = s.variance(200, 300, 1);
      // 60000 draws: relative standard error of the variance is below 0.6%
      CHECK(empirical_variance(w) == doctest::Approx(target).epsilon(0.03));
      if (dist == WeightDistribution::Uniform) CHECK(max_abs(w) <= std::sqrt(3.0 * target));
    }
  }
}

TEST_CASE("initialization is deterministic and layer-local") {
  const auto spec = spec_of(Arch::Vanilla, 4);
  const auto a = initialize_params(spec, InitScheme::of(InitFamily::Xavier, 5));
  const auto b = initialize_params(spec, InitScheme::of(InitFamily::Xavier, 5));
  CHECK(a == b);
  CHECK(initialize_params(spec, InitScheme::of(InitFamily::Xavier, 6)).weights[0] != a.weights[0]);

  // A deeper model shares the first layers' draws.
  auto deeper = spec;
  deeper.depth = 6;
  const auto c = initialize_params(deeper, InitScheme::of(InitFamily::Xavier, 5));
  CHECK(c.weights[1] == a.weights[1]);
  CHECK(c.weights[2] == a.weights[2]);
  for (const auto& bias : a.biases)
    for (double v : bias) CHECK(v == 0.0);
}

TEST_CASE("parameter counts") {
  // res, L = 2, d0 = 4, d = 8, C = 3: 4*8 + 2*(8*8 + 8) + 8*3
  const auto res = spec_of(Arch::Res, 2);
  CHECK(count_parameters(res) == 200);
  CHECK(initialize_params(res, InitScheme::of(InitFamily::Xavier)).num_scalars() == 200);
  const auto gat = spec_of(Arch::GatRes, 2);
  CHECK(count_parameters(gat) == 204);
  // vanilla, L = 3: 4*8 + 8 + 8*8 + 8 + 8*3 + 3
  CHECK(count_parameters(spec_of(Arch::Vanilla, 3)) == 139);
}

TEST_CASE("scale application") {
  const auto spec = spec_of(Arch::Vanilla, 3);
  const auto base = initialize_params(spec, InitScheme::of(InitFamily::Xavier, 2));
  const auto scaled = apply_scales(base, {2.0, 1.0, 0.5});
  CHECK(scaled.weights[0](1, 2) == doctest::Approx(2.0 * base.weights[0](1, 2)));
  CHECK(scaled.weights[1] == base.weights[1]);
  CHECK(scaled.weights[2](0, 0) == doctest::Approx(0.5 * base.weights[2](0, 0)));
  CHECK(apply_scales(base, {1.0, 1.0, 1.0}) == base);
  CHECK_THROWS_AS(apply_scales(base, {1.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(apply_scales(base, {1.0, 0.0, 1.0}), ValidationError);

  const auto rspec = spec_of(Arch::Res, 3);
  CHECK(num_scales(rspec) == 1);
  CHECK(num_scales(spec) == 3);
  const auto rbase = initialize_params(rspec, InitScheme::of(InitFamily::Xavier, 2));
  const auto rs = apply_scales(rbase, {3.0});
  CHECK(rs.input_proj == rbase.input_proj);
  CHECK(rs.output_proj == rbase.output_proj);
  CHECK(rs.weights[2](1, 1) == doctest::Approx(3.0 * rbase.weights[2](1, 1)));
}
