#include <catch2/catch_amalgamated.hpp>

#include <perifrac/grid_ops.hpp>
#include <perifrac/test_functions.hpp>

#include "oracles.hpp"

using namespace perifrac;

namespace {

std::shared_ptr<const TestFunction> gaussian1d(double A = 1.0, double w = 1.0) {
  return std::make_shared<TestFunction>(TestFunctionKind::gaussian, 1, A, std::vector<double>{0.0},
                                        std::vector<double>{w});
}

}  // namespace

TEST_CASE("lp modular matches the closed form and quadrature oracle") {
  const UniformGrid g(Box({-7.0}, {7.0}), {280});
  const GridFunction u = sample(gaussian1d(1.3, 0.9), g);
  for (double p : {1.5, 2.0, 3.0}) {
    const QuadValue got = lp_modular(u, p);
    const double closed = oracles::gaussian_lp_pow(1.3, 0.9, p);
    const double simpson = oracles::integrate(
        [&](double x) { return std::pow(std::fabs(1.3 * std::exp(-(x / 0.9) * (x / 0.9))), p); }, -7.0, 7.0);
    CHECK(got.value == Catch::Approx(closed).epsilon(5e-7));
    CHECK(got.value == Catch::Approx(simpson).epsilon(5e-7));
    CHECK(std::fabs(got.value - closed) <= std::max(got.error * 50.0, 1e-9));
  }
  CHECK(lp_norm(u, 2.0) == Catch::Approx(std::sqrt(oracles::gaussian_lp_pow(1.3, 0.9, 2.0))).epsilon(1e-6));
}

TEST_CASE("domain-restricted modular skips outside cells") {
  const UniformGrid g(Box({-4.0}, {4.0}), {160});
  const GridFunction u = sample(gaussian1d(), g);
  const Box omega({0.0}, {4.0});
  const QuadValue half = lp_modular(u, 2.0, 1, &omega);
  CHECK(half.value == Catch::Approx(0.5 * oracles::gaussian_lp_pow(1.0, 1.0, 2.0)).epsilon(1e-6));
}

TEST_CASE("mixed norm factorizes on products") {
  const UniformGrid g(Box({-6.0, -6.0}, {6.0, 6.0}), {96, 96});
  const auto f = std::make_shared<TestFunction>(TestFunctionKind::gaussian, 2, 1.0, std::vector<double>{0.0, 0.0},
                                                std::vector<double>{1.0, 1.4});
  const GridFunction u = sample(f, g);
  const double got = mixed_norm(u, {3.0, 2.0});
  // separable integrand: the iterated norm is the product of axis norms
  const double nx = std::pow(oracles::gaussian_lp_pow(1.0, 1.0, 3.0), 1.0 / 3.0);
  const double ny = std::pow(oracles::gaussian_lp_pow(1.0, 1.4, 2.0), 1.0 / 2.0);
  CHECK(got == Catch::Approx(nx * ny).epsilon(1e-5));
}

TEST_CASE("partial derivative uses the closed form when available") {
  const UniformGrid g(Box({-5.0}, {5.0}), {100});
  const GridFunction u = sample(gaussian1d(), g);
  const GridFunction du = partial_derivative(u, 0);
  CHECK(du.provenance == Provenance::derived_analytic);
  const double x = g.node_coord(0, 30);
  CHECK(du.values[30] == Catch::Approx(-2.0 * x * std::exp(-x * x)).epsilon(1e-13));

  GridFunction v = u;
  v.source.reset();
  const GridFunction dv = partial_derivative(v, 0);
  CHECK(dv.provenance == Provenance::derived_numeric);
  // second-order stencil: O(h^2) agreement with the closed form
  double maxerr = 0.0;
  for (long j = 0; j < g.node_count(); ++j) maxerr = std::max(maxerr, std::fabs(dv.values[j] - du.values[j]));
  CHECK(maxerr < 2.0 * g.spacing(0) * g.spacing(0));
}

TEST_CASE("mollification keeps mass normalization and smoothness flags") {
  const UniformGrid g(Box({-4.0}, {4.0}), {200});
  const GridFunction u = sample(gaussian1d(), g);
  const GridFunction ue = mollify(u, 0.2);
  CHECK(ue.smooth2);
  CHECK(ue.grid.box.lo[0] < g.box.lo[0]);
  // kernel weights sum to one: a constant region stays constant
  GridFunction c(g);
  for (auto& v : c.values) v = 3.25;
  const GridFunction ce = mollify(c, 0.2);
  const double mid[1] = {0.0};
  CHECK(ce.eval(mid) == Catch::Approx(3.25).epsilon(1e-13));
  // Lp norm does not increase under averaging of translates
  CHECK(lp_norm_pow(ue, 2.0) <= lp_norm_pow(u, 2.0) * (1.0 + 1e-9));
  CHECK_THROWS_AS(mollify(u, 0.01), std::invalid_argument);
}

TEST_CASE("cutoff profile and truncation") {
  CHECK(cutoff_profile(0.5) == 1.0);
  CHECK(cutoff_profile(2.5) == 0.0);
  CHECK(cutoff_profile(1.5) == Catch::Approx(0.5).epsilon(1e-14));
  // C1 ramp: slope stays below 1.5 in the transition band
  for (double r = 1.0; r <= 2.0; r += 0.01) {
    const double d = (cutoff_profile(r + 1e-7) - cutoff_profile(r - 1e-7)) / 2e-7;
    CHECK(std::fabs(d) <= 1.5 + 1e-6);
  }
  const UniformGrid g(Box({-4.0}, {4.0}), {64});
  const GridFunction u = sample(gaussian1d(), g);
  const GridFunction uk = truncate(u, 1.0);
  for (long j = 0; j < g.node_count(); ++j) {
    const double x = std::fabs(g.node_coord(0, j));
    if (x <= 1.0) CHECK(uk.values[j] == u.values[j]);
    if (x >= 2.0) CHECK(uk.values[j] == 0.0);
  }
  CHECK_FALSE(uk.smooth2);
}
