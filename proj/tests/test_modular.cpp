#include <catch2/catch_amalgamated.hpp>

#include <perifrac/grid_ops.hpp>
#include <perifrac/modular.hpp>
#include <perifrac/test_functions.hpp>

#include "oracles.hpp"

using namespace perifrac;

namespace {

GridFunction random_function(oracles::Rng& rng, double scale) {
  const long n = rng.integer(16, 48);
  const UniformGrid g(Box({rng.uniform(-2.0, -0.5)}, {rng.uniform(0.5, 2.0)}), {n});
  GridFunction u(g);
  for (auto& v : u.values) v = scale * rng.uniform(-1.0, 1.0);
  return u;
}

}  // namespace

TEST_CASE("luxemburg norm closed form for constant exponent") {
  const UniformGrid g(Box({-5.0}, {5.0}), {200});
  const auto f = std::make_shared<TestFunction>(TestFunctionKind::gaussian, 1, 2.0, std::vector<double>{0.0},
                                                std::vector<double>{1.0});
  const GridFunction u = sample(f, g);
  for (double p : {1.5, 2.0, 3.0}) {
    const ScalarExponentField r = ScalarExponentField::constant(1, p);
    const ModularSamples m = lebesgue_modular(u, r, true);
    const LuxemburgResult lux = luxemburg_norm(m);
    CHECK(lux.converged);
    const double expected = std::pow(oracles::gaussian_lp_pow(2.0, 1.0, p) / p, 1.0 / p);
    CHECK(lux.norm == Catch::Approx(expected).epsilon(1e-6));
    // the gauge property itself
    CHECK(m.value_at(lux.norm) == Catch::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("modular samples cache and rescale consistently") {
  ModularSamples m;
  m.add(0.5, 2.0);
  m.add(0.25, 3.0);
  CHECK(m.value() == Catch::Approx(0.75));
  CHECK(m.value_at(1.0) == m.value());
  CHECK(m.value_at(2.0) == Catch::Approx(0.5 / 4.0 + 0.25 / 8.0).epsilon(1e-15));
  m.add(0.1, 2.5);
  CHECK(m.value() == Catch::Approx(0.85));
  CHECK_FALSE(m.constant_exponent);
  CHECK(m.emin == 2.0);
  CHECK(m.emax == 3.0);
}

TEST_CASE("luxemburg gauge properties on randomized data") {
  oracles::Rng rng(101);
  const Box probe({-2.0}, {2.0});
  for (int t = 0; t < 40; ++t) {
    const GridFunction u = random_function(rng, std::pow(10.0, rng.uniform(-2.0, 2.0)));
    ExponentField field = t % 3 == 0 ? ExponentField::constant(1, rng.uniform(1.2, 3.5), probe)
                                     : ExponentField::separable(1, rng.uniform(1.2, 2.0), rng.uniform(0.0, 1.0),
                                                                {1.0}, rng.uniform(-0.5, 0.5), probe);
    const ScalarExponentField r{field};
    const ModularSamples m = lebesgue_modular(u, r, false);
    if (m.value() == 0.0) continue;
    const LuxemburgResult lux = luxemburg_norm(m);
    REQUIRE(lux.converged);
    // unit modular at the gauge
    CHECK(m.value_at(lux.norm) == Catch::Approx(1.0).epsilon(1e-8));
    // absolute homogeneity via independent bisections
    const double c = std::pow(10.0, rng.uniform(-1.5, 1.5));
    GridFunction cu = u;
    for (auto& v : cu.values) v *= c;
    const LuxemburgResult luxc = luxemburg_norm(lebesgue_modular(cu, r, false));
    CHECK(luxc.norm == Catch::Approx(c * lux.norm).epsilon(1e-9));
  }
}

TEST_CASE("norm and modular order the same way in every regime") {
  const UniformGrid g(Box({-3.0}, {3.0}), {120});
  const auto f = std::make_shared<TestFunction>(TestFunctionKind::bump, 1, 1.0, std::vector<double>{0.0},
                                                std::vector<double>{1.0});
  const GridFunction base = sample(f, g);
  const Box probe({-3.0}, {3.0});
  const ScalarExponentField r{ExponentField::separable(1, 1.7, 0.6, {1.0}, 0.3, probe)};
  for (double scale : {12.0, 1e-2, 1.0}) {
    GridFunction u = base;
    for (auto& v : u.values) v *= scale;
    const NormModularReport rep = norm_modular_relations(lebesgue_modular(u, r, false));
    INFO("scale " << scale << " regime " << rep.regime);
    CHECK(rep.pass());
  }
  const GridFunction z(g);
  const NormModularReport zero = norm_modular_relations(lebesgue_modular(z, r, false));
  CHECK(zero.regime == "zero");
  CHECK(zero.pass());
}

TEST_CASE("weighted and plain conventions differ by the exponent factor") {
  const UniformGrid g(Box({-2.0}, {2.0}), {64});
  const auto f = std::make_shared<TestFunction>(TestFunctionKind::gaussian, 1, 1.0, std::vector<double>{0.0},
                                                std::vector<double>{1.0});
  const GridFunction u = sample(f, g);
  const ScalarExponentField r = ScalarExponentField::constant(1, 2.5);
  const double plain = lebesgue_modular(u, r, false).value();
  const double weighted = lebesgue_modular(u, r, true).value();
  CHECK(weighted == Catch::Approx(plain / 2.5).epsilon(1e-13));
}
