#include <catch2/catch_amalgamated.hpp>

#include <perifrac/grid.hpp>
#include <perifrac/test_functions.hpp>

#include "oracles.hpp"

using namespace perifrac;

TEST_CASE("box validates and measures") {
  CHECK_THROWS_AS(Box({0.0}, {0.0}), std::invalid_argument);
  CHECK_THROWS_AS(Box({0.0, 1.0}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(Box({}, {}), std::invalid_argument);
  const Box b({-1.0, 0.0}, {1.0, 3.0});
  CHECK(b.dim() == 2);
  CHECK(b.extent(1) == 3.0);
  CHECK(b.volume() == 6.0);
  const double inside[2] = {0.0, 1.0}, outside[2] = {0.0, 3.5};
  CHECK(b.contains(inside));
  CHECK_FALSE(b.contains(outside));
}

TEST_CASE("grid coordinates and flattening") {
  const UniformGrid g(Box({0.0, -1.0}, {1.0, 1.0}), {4, 8});
  CHECK(g.spacing(0) == 0.25);
  CHECK(g.spacing(1) == 0.25);
  CHECK(g.node_count() == 5 * 9);
  CHECK(g.cell_count() == 32);
  CHECK(g.node_coord(1, 4) == Catch::Approx(0.0));
  CHECK(g.center_coord(0, 0) == Catch::Approx(0.125));

  long idx[max_dim] = {3, 7};
  long back[max_dim] = {0, 0};
  g.node_unflatten(g.node_flat(idx), back);
  CHECK(back[0] == 3);
  CHECK(back[1] == 7);
  g.cell_unflatten(g.cell_flat(idx), back);
  CHECK(back[0] == 3);
  CHECK(back[1] == 7);
}

TEST_CASE("multi-index order matches flat node order") {
  const UniformGrid g(Box({0.0, 0.0}, {1.0, 1.0}), {3, 2});
  long flat = 0;
  for (MultiIndex mi(g.node_extents()); !mi.done; mi.advance(), ++flat) {
    long idx[max_dim] = {mi.idx[0], mi.idx[1]};
    CHECK(g.node_flat(idx) == flat);
  }
  CHECK(flat == g.node_count());
}

TEST_CASE("padded grid keeps spacing and node alignment") {
  const UniformGrid g(Box({0.0}, {1.0}), {10});
  const UniformGrid p = g.padded({3});
  CHECK(p.cells[0] == 16);
  CHECK(p.spacing(0) == Catch::Approx(g.spacing(0)));
  CHECK(p.node_coord(0, 3) == Catch::Approx(g.node_coord(0, 0)));
  CHECK(p.box.lo[0] == Catch::Approx(-0.3));
}

TEST_CASE("grid function interpolation is multilinear and zero outside") {
  const UniformGrid g(Box({0.0, 0.0}, {1.0, 1.0}), {5, 7});
  GridFunction u(g);
  // nodal samples of an affine-in-each-axis function, reproduced exactly
  auto bilinear = [](double x, double y) { return 2.0 + 3.0 * x - 1.5 * y + 0.75 * x * y; };
  for (MultiIndex mi(g.node_extents()); !mi.done; mi.advance()) {
    long idx[max_dim] = {mi.idx[0], mi.idx[1]};
    u.values[g.node_flat(idx)] = bilinear(g.node_coord(0, mi.idx[0]), g.node_coord(1, mi.idx[1]));
  }
  oracles::Rng rng(7);
  for (int t = 0; t < 50; ++t) {
    const double x[2] = {rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)};
    CHECK(u.eval(x) == Catch::Approx(bilinear(x[0], x[1])).epsilon(1e-13));
  }
  const double corner[2] = {1.0, 1.0};
  CHECK(u.eval(corner) == Catch::Approx(bilinear(1.0, 1.0)).epsilon(1e-13));
  const double out[2] = {1.0 + 1e-9, 0.5};
  CHECK(u.eval(out) == 0.0);
}

TEST_CASE("midpoint value prefers the attached closed form") {
  const UniformGrid g(Box({-2.0}, {2.0}), {8});
  const auto f = std::make_shared<TestFunction>(TestFunctionKind::gaussian, 1, 1.0, std::vector<double>{0.0},
                                                std::vector<double>{1.0});
  const GridFunction u = sample(f, g);
  const double c[1] = {g.center_coord(0, 4)};
  CHECK(u.midpoint_value(c) == Catch::Approx(f->eval(c, 1)).epsilon(1e-15));
  // detached data falls back to interpolation between nodes
  GridFunction v = u;
  v.source.reset();
  const double xa = g.node_coord(0, 4), xb = g.node_coord(0, 5);
  const double interp = 0.5 * (f->eval(&xa, 1) + f->eval(&xb, 1));
  CHECK(v.midpoint_value(c) == Catch::Approx(interp).epsilon(1e-13));
}
