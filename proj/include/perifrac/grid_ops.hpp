#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "exponents.hpp"
#include "grid.hpp"
#include "parallel.hpp"
#include "test_functions.hpp"

// Volume quadrature, iterated mixed norms and the basic calculus operations
// on grid functions: derivative, mollification, smooth radial cutoff.

namespace perifrac {

struct QuadValue {
  double value = 0.0;
  double error = 0.0;  // midpoint vs trapezoid discrepancy
};

namespace detail {

// |t|^p with fast paths for the common integer exponents.
inline double pow_abs(double t, double p) {
  const double a = std::fabs(t);
  if (p == 2.0) return a * a;
  if (p == 3.0) return a * a * a;
  if (p == 1.0) return a;
  if (a == 0.0) return 0.0;
  return std::pow(a, p);
}

// Corner average of node values over one cell (= multilinear value at the center).
inline double corner_average(const GridFunction& u, const long* cell) {
  const int d = u.dim();
  const long corners = 1L << d;
  double acc = 0.0;
  for (long m = 0; m < corners; ++m) {
    long idx[max_dim];
    for (int a = 0; a < d; ++a) idx[a] = cell[a] + ((m >> a) & 1);
    acc += u.values[u.grid.node_flat(idx)];
  }
  return acc / static_cast<double>(corners);
}

}  // namespace detail

// integral of |u(x)|^{r(x)} dx over the box by the composite midpoint rule,
// with a midpoint/trapezoid discrepancy as the error estimate. The integrand
// at a center uses the attached analytic source when there is one.
inline QuadValue lp_modular(const GridFunction& u, const ScalarExponentField& r, int threads = 1,
                            const Box* omega = nullptr) {
  const UniformGrid& g = u.grid;
  const double vol = g.cell_volume();
  const long ncells = g.cell_count();
  std::vector<double> mid(ncells, 0.0), trap(ncells, 0.0);
  for_each_block(static_cast<std::size_t>(ncells), threads, [&](std::size_t, std::size_t lo, std::size_t hi) {
    long idx[max_dim];
    double c[max_dim];
    for (std::size_t f = lo; f < hi; ++f) {
      g.cell_unflatten(static_cast<long>(f), idx);
      for (int a = 0; a < g.dim(); ++a) c[a] = g.center_coord(a, idx[a]);
      if (omega && !omega->contains(c)) continue;
      const double rp = r.eval(c);
      mid[f] = vol * detail::pow_abs(u.midpoint_value(c), rp);
      // trapezoid companion: corner average of |u|^r
      const int d = g.dim();
      const long corners = 1L << d;
      double acc = 0.0;
      for (long m = 0; m < corners; ++m) {
        long nidx[max_dim];
        for (int a = 0; a < d; ++a) nidx[a] = idx[a] + ((m >> a) & 1);
        acc += detail::pow_abs(u.values[g.node_flat(nidx)], rp);
      }
      trap[f] = vol * acc / static_cast<double>(corners);
    }
  });
  QuadValue q;
  q.value = pairwise_sum(mid);
  q.error = std::fabs(q.value - pairwise_sum(trap));
  return q;
}

inline QuadValue lp_modular(const GridFunction& u, double p, int threads = 1, const Box* omega = nullptr) {
  return lp_modular(u, ScalarExponentField::constant(u.dim(), p), threads, omega);
}

inline double lp_norm_pow(const GridFunction& u, double p, int threads = 1) {
  return lp_modular(u, p, threads).value;
}

inline double lp_norm(const GridFunction& u, double p, int threads = 1) {
  return std::pow(lp_norm_pow(u, p, threads), 1.0 / p);
}

// Iterated norm ||...|| u ||_{p1(dx1)} ...||_{pd(dxd)}: reduce axis 0 first,
// then axis 1, and so on, each reduction a one-axis midpoint rule.
inline double mixed_norm(const GridFunction& u, const std::vector<double>& pvec) {
  const UniformGrid& g = u.grid;
  const int d = g.dim();
  if (static_cast<int>(pvec.size()) != d)
    throw std::invalid_argument("mixed_norm: one exponent per axis required");
  for (double p : pvec)
    if (!(p >= 1.0)) throw std::invalid_argument("mixed_norm: exponents must be >= 1");

  // values at all cell centers
  std::vector<long> ext(g.cells.begin(), g.cells.end());
  std::vector<double> data(g.cell_count());
  {
    long i = 0;
    double c[max_dim];
    for (MultiIndex mi(ext); !mi.done; mi.advance(), ++i) {
      for (int a = 0; a < d; ++a) c[a] = g.center_coord(a, mi.idx[a]);
      data[i] = u.midpoint_value(c);
    }
  }
  // fold axes in order; axis 0 is the slowest stride in row-major layout
  for (int axis = 0; axis < d; ++axis) {
    const long n0 = ext[0];
    long rest = 1;
    for (std::size_t a = 1; a < ext.size(); ++a) rest *= ext[a];
    const double h = g.spacing(axis);
    const double p = pvec[axis];
    std::vector<double> out(rest, 0.0);
    for (long r = 0; r < rest; ++r) {
      double acc = 0.0;
      for (long k = 0; k < n0; ++k) acc += detail::pow_abs(data[k * rest + r], p);
      out[r] = std::pow(acc * h, 1.0 / p);
    }
    data.swap(out);
    ext.erase(ext.begin());
  }
  return data[0];
}

// Grid derivative along one axis: analytic when the source provides it,
// otherwise second order finite differences (central inside, one-sided at
// the two boundary nodes).
inline GridFunction partial_derivative(const GridFunction& u, int axis) {
  const UniformGrid& g = u.grid;
  if (axis < 0 || axis >= g.dim()) throw std::invalid_argument("partial_derivative: axis out of range");
  if (g.nodes(axis) < 3) throw std::invalid_argument("partial_derivative: need at least 3 nodes on the axis");
  GridFunction d(g);
  if (u.source && u.source->has_partial()) {
    for (MultiIndex mi(g.node_extents()); !mi.done; mi.advance()) {
      double x[max_dim];
      for (int a = 0; a < g.dim(); ++a) x[a] = g.node_coord(a, mi.idx[a]);
      d.values[g.node_flat(mi.idx.data())] = u.source->partial(axis, x, g.dim());
    }
    d.provenance = Provenance::derived_analytic;
    d.source = std::make_shared<PartialSource>(u.source, axis);
    d.smooth2 = false;
    return d;
  }
  const double h = g.spacing(axis);
  const long n = g.nodes(axis);
  for (MultiIndex mi(g.node_extents()); !mi.done; mi.advance()) {
    long idx[max_dim] = {0, 0, 0};
    for (int a = 0; a < g.dim(); ++a) idx[a] = mi.idx[a];
    const long k = idx[axis];
    auto at = [&](long j) {
      long t[max_dim] = {0, 0, 0};
      for (int a = 0; a < g.dim(); ++a) t[a] = idx[a];
      t[axis] = j;
      return u.values[g.node_flat(t)];
    };
    double v;
    if (k == 0)
      v = (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
    else if (k == n - 1)
      v = (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h);
    else
      v = (at(k + 1) - at(k - 1)) / (2.0 * h);
    d.values[g.node_flat(idx)] = v;
  }
  d.provenance = Provenance::derived_numeric;
  d.smooth2 = false;
  return d;
}

// Discrete mollification with the standard compactly supported smooth kernel
// exp(-1/(1-|x/eps|^2)), renormalized so the stencil weights sum to one.
// The grid is padded so the enlarged support fits; needs eps >= 2 * spacing.
inline GridFunction mollify(const GridFunction& u, double eps) {
  const UniformGrid& g = u.grid;
  if (!(eps >= 2.0 * g.max_spacing()))
    throw std::invalid_argument("mollify: kernel under-resolved, need eps >= 2*spacing");
  const int d = g.dim();
  std::vector<long> reach(d), pad(d);
  for (int a = 0; a < d; ++a) {
    reach[a] = static_cast<long>(std::ceil(eps / g.spacing(a))) - 1;  // offsets with |k h| < eps
    pad[a] = reach[a];
  }
  // kernel weights on the offset lattice
  std::vector<long> kext(d);
  for (int a = 0; a < d; ++a) kext[a] = 2 * reach[a] + 1;
  std::vector<double> w;
  w.reserve(64);
  double total = 0.0;
  for (MultiIndex mi(kext); !mi.done; mi.advance()) {
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) {
      const double t = static_cast<double>(mi.idx[a] - reach[a]) * g.spacing(a) / eps;
      r2 += t * t;
    }
    const double v = r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0;
    w.push_back(v);
    total += v;
  }
  for (double& v : w) v /= total;

  GridFunction out(g.padded(pad));
  const UniformGrid& ge = out.grid;
  for (MultiIndex mi(ge.node_extents()); !mi.done; mi.advance()) {
    double acc = 0.0;
    std::size_t wi = 0;
    for (MultiIndex ki(kext); !ki.done; ki.advance(), ++wi) {
      if (w[wi] == 0.0) continue;
      long src[max_dim];
      bool inside = true;
      for (int a = 0; a < d; ++a) {
        src[a] = mi.idx[a] - pad[a] - (ki.idx[a] - reach[a]);
        if (src[a] < 0 || src[a] >= g.nodes(a)) {
          inside = false;
          break;
        }
      }
      if (inside) acc += w[wi] * u.values[g.node_flat(src)];
    }
    out.values[ge.node_flat(mi.idx.data())] = acc;
  }
  out.smooth2 = true;  // smoothing kernel
  out.provenance = Provenance::derived_numeric;
  return out;
}

// C1 radial cutoff profile: 1 on [0,1], 0 on [2,inf), cubic ramp between,
// slope bounded by 1.5.
inline double cutoff_profile(double r) {
  if (r <= 1.0) return 1.0;
  if (r >= 2.0) return 0.0;
  const double t = r - 1.0;
  return 1.0 - t * t * (3.0 - 2.0 * t);
}

// Multiplies u by the rescaled cutoff eta(x/k); eta is 1 on the ball of
// radius k and vanishes beyond radius 2k, with |grad| <= 1.5/k.
inline GridFunction truncate(const GridFunction& u, double k) {
  if (!(k > 0.0)) throw std::invalid_argument("truncate: radius must be positive");
  const UniformGrid& g = u.grid;
  GridFunction out(g);
  for (MultiIndex mi(g.node_extents()); !mi.done; mi.advance()) {
    double r2 = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
      const double x = g.node_coord(a, mi.idx[a]);
      r2 += x * x;
    }
    const long f = g.node_flat(mi.idx.data());
    out.values[f] = u.values[f] * cutoff_profile(std::sqrt(r2) / k);
  }
  out.smooth2 = false;  // cutoff is only C1
  out.provenance = Provenance::derived_numeric;
  return out;
}

}
