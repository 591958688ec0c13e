#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

// Axis-aligned boxes, uniform tensor grids and nodal grid functions.
// Grid functions extend by zero outside their box. Dimension is a runtime
// quantity; everything here targets dimensions 1..3.

namespace perifrac {

inline constexpr int max_dim = 3;

struct Box {
  std::vector<double> lo, hi;

  Box() = default;
  Box(std::vector<double> l, std::vector<double> h) : lo(std::move(l)), hi(std::move(h)) {
    if (lo.size() != hi.size() || lo.empty() || lo.size() > max_dim)
      throw std::invalid_argument("Box: need 1..3 matching bounds");
    for (std::size_t a = 0; a < lo.size(); ++a)
      if (!(lo[a] < hi[a])) throw std::invalid_argument("Box: lo must be < hi on every axis");
  }

  int dim() const { return static_cast<int>(lo.size()); }

  double extent(int axis) const { return hi[axis] - lo[axis]; }

  double volume() const {
    double v = 1.0;
    for (int a = 0; a < dim(); ++a) v *= extent(a);
    return v;
  }

  bool contains(const double* x) const {
    for (int a = 0; a < dim(); ++a)
      if (x[a] < lo[a] || x[a] > hi[a]) return false;
    return true;
  }
};

// Iterates a multi-index over extents n[0] x ... x n[d-1], last axis fastest.
struct MultiIndex {
  std::array<long, max_dim> idx{};
  std::array<long, max_dim> n{};
  int dim = 0;
  bool done = false;

  explicit MultiIndex(const std::vector<long>& extents) {
    dim = static_cast<int>(extents.size());
    for (int a = 0; a < dim; ++a) {
      n[a] = extents[a];
      idx[a] = 0;
      if (extents[a] <= 0) done = true;
    }
  }

  void advance() {
    for (int a = dim - 1; a >= 0; --a) {
      if (++idx[a] < n[a]) return;
      idx[a] = 0;
    }
    done = true;
  }
};

struct UniformGrid {
  Box box;
  std::vector<long> cells;  // cells per axis, nodes = cells + 1

  UniformGrid() = default;
  UniformGrid(Box b, std::vector<long> c) : box(std::move(b)), cells(std::move(c)) {
    if (static_cast<int>(cells.size()) != box.dim())
      throw std::invalid_argument("UniformGrid: cells/box dimension mismatch");
    for (long m : cells)
      if (m < 1) throw std::invalid_argument("UniformGrid: need at least one cell per axis");
  }

  int dim() const { return box.dim(); }
  double spacing(int axis) const { return box.extent(axis) / static_cast<double>(cells[axis]); }

  double max_spacing() const {
    double h = 0.0;
    for (int a = 0; a < dim(); ++a) h = std::max(h, spacing(a));
    return h;
  }

  long nodes(int axis) const { return cells[axis] + 1; }

  long node_count() const {
    long n = 1;
    for (int a = 0; a < dim(); ++a) n *= nodes(a);
    return n;
  }

  long cell_count() const {
    long n = 1;
    for (int a = 0; a < dim(); ++a) n *= cells[a];
    return n;
  }

  double node_coord(int axis, long k) const { return box.lo[axis] + spacing(axis) * static_cast<double>(k); }
  double center_coord(int axis, long k) const { return box.lo[axis] + spacing(axis) * (static_cast<double>(k) + 0.5); }

  double cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim(); ++a) v *= spacing(a);
    return v;
  }

  long node_flat(const long* idx) const {
    long f = 0;
    for (int a = 0; a < dim(); ++a) f = f * nodes(a) + idx[a];
    return f;
  }

  long cell_flat(const long* idx) const {
    long f = 0;
    for (int a = 0; a < dim(); ++a) f = f * cells[a] + idx[a];
    return f;
  }

  void node_unflatten(long flat, long* idx) const {
    for (int a = dim() - 1; a >= 0; --a) {
      idx[a] = flat % nodes(a);
      flat /= nodes(a);
    }
  }

  void cell_unflatten(long flat, long* idx) const {
    for (int a = dim() - 1; a >= 0; --a) {
      idx[a] = flat % cells[a];
      flat /= cells[a];
    }
  }

  std::vector<long> node_extents() const {
    std::vector<long> e(cells.size());
    for (int a = 0; a < dim(); ++a) e[a] = nodes(a);
    return e;
  }

  // Same spacing, box grown by pad[axis] whole cells on both sides of each axis.
  UniformGrid padded(const std::vector<long>& pad) const {
    std::vector<double> lo(box.lo), hi(box.hi);
    std::vector<long> c(cells);
    for (int a = 0; a < dim(); ++a) {
      const double h = spacing(a);
      lo[a] -= h * static_cast<double>(pad[a]);
      hi[a] += h * static_cast<double>(pad[a]);
      c[a] += 2 * pad[a];
    }
    return UniformGrid(Box(lo, hi), c);
  }
};

// Closed-form function a grid function was sampled from, when it has one.
// Keeps analytic evaluation and derivatives available to quadratures that
// are allowed to use them.
struct AnalyticSource {
  virtual ~AnalyticSource() = default;
  virtual double eval(const double* x, int dim) const = 0;
  virtual bool has_partial() const { return false; }
  virtual double partial(int, const double*, int) const {
    throw std::logic_error("AnalyticSource: no analytic partial derivative");
  }
  virtual bool twice_differentiable() const { return false; }
};

enum class Provenance { sampled, derived_analytic, derived_numeric };

struct GridFunction {
  UniformGrid grid;
  std::vector<double> values;  // node values, row-major, last axis fastest
  bool smooth2 = false;        // C2 data: directional quadratures may use cubic interpolation
  Provenance provenance = Provenance::sampled;
  std::shared_ptr<const AnalyticSource> source;

  GridFunction() = default;
  explicit GridFunction(UniformGrid g) : grid(std::move(g)), values(grid.node_count(), 0.0) {}

  int dim() const { return grid.dim(); }

  // Multilinear interpolation of node values; zero outside the box.
  double eval(const double* x) const {
    const int d = dim();
    long base[max_dim];
    double frac[max_dim];
    for (int a = 0; a < d; ++a) {
      if (x[a] < grid.box.lo[a] || x[a] > grid.box.hi[a]) return 0.0;
      double t = (x[a] - grid.box.lo[a]) / grid.spacing(a);
      long c = static_cast<long>(std::floor(t));
      if (c >= grid.cells[a]) c = grid.cells[a] - 1;
      if (c < 0) c = 0;
      base[a] = c;
      frac[a] = t - static_cast<double>(c);
    }
    double acc = 0.0;
    const long corners = 1L << d;
    for (long m = 0; m < corners; ++m) {
      double w = 1.0;
      long idx[max_dim];
      for (int a = 0; a < d; ++a) {
        const bool hi = (m >> a) & 1;
        w *= hi ? frac[a] : 1.0 - frac[a];
        idx[a] = base[a] + (hi ? 1 : 0);
      }
      if (w != 0.0) acc += w * values[grid.node_flat(idx)];
    }
    return acc;
  }

  double eval(const std::vector<double>& x) const { return eval(x.data()); }

  // Value used by midpoint quadrature at a cell center: the analytic source
  // when one is attached, otherwise interpolation of node data.
  double midpoint_value(const double* center) const {
    if (source) {
      if (!grid.box.contains(center)) return 0.0;
      return source->eval(center, dim());
    }
    return eval(center);
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::fabs(v));
    return m;
  }
};

}
