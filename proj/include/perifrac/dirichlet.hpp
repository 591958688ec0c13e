#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "bbm.hpp"
#include "nonlocal.hpp"

// Dirichlet problem for the anisotropic nonlocal p-Laplacian on a box:
// minimize over v vanishing outside the interior nodes
//
//   Ihat(v) = sum_i 1/p_i * S_i(v) - int f v,
//
// where S_i is the horizon-rescaled directional energy
// delta_i^{-p_i(1-s_i)} [v]_i for delta_i > 0 and its local limit
// 2/(p_i(1-s_i)) ||d_i v||_{p_i}^{p_i} for delta_i = 0, discretized with
// two-point differences across cells. All quadrature collapses at setup
// into flat sample lists (sparse stencil, weight, exponent), so energy and
// gradient evaluations are linear passes. Descent is Barzilai-Borwein
// scaled gradient descent with Armijo backtracking.

namespace perifrac {

struct SolveOptions {
  int max_iter = 50000;
  double grad_tol = 1e-9;        // sup-norm of the discrete gradient
  double energy_rel_tol = 1e-12; // relative decrease over the window below
  int energy_window = 10;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 80;
  double mu_rel = 1e-10;         // duality-map smoothing for p < 2
  bool verbose = false;
};

struct SolveResult {
  GridFunction u;
  std::vector<double> energy_history;
  std::vector<double> direction_energy;  // S_i at the solution
  double energy = 0.0;
  double weak_residual = 0.0;  // final gradient sup-norm
  int iterations = 0;
  std::string status;  // grad_tol | energy_flat | max_iter | line_search_stall
};

namespace detail {

// Nodes and weights of the multilinear interpolation of a point, matching
// GridFunction::eval (zero outside the box). Returns the entry count.
inline int interp_stencil(const UniformGrid& g, const double* x, long* nodes, double* wts) {
  const int d = g.dim();
  long cell[max_dim];
  double frac[max_dim];
  for (int a = 0; a < d; ++a) {
    if (x[a] < g.box.lo[a] || x[a] > g.box.hi[a]) return 0;
    const double t = (x[a] - g.box.lo[a]) / g.spacing(a);
    long c = static_cast<long>(std::floor(t));
    if (c < 0) c = 0;
    if (c > g.cells[a] - 1) c = g.cells[a] - 1;
    cell[a] = c;
    frac[a] = t - static_cast<double>(c);
  }
  int cnt = 0;
  for (int corner = 0; corner < (1 << d); ++corner) {
    double w = 1.0;
    long idx[max_dim];
    for (int a = 0; a < d; ++a) {
      const int bit = (corner >> a) & 1;
      w *= bit ? frac[a] : 1.0 - frac[a];
      idx[a] = cell[a] + bit;
    }
    if (w == 0.0) continue;
    nodes[cnt] = g.node_flat(idx);
    wts[cnt] = w;
    ++cnt;
  }
  return cnt;
}

}  // namespace detail

class DirichletProblem {
 public:
  DirichletProblem(const UniformGrid& grid, const AnisotropyParams& par, const GridFunction& load,
                   const SingularQuadSpec& quad = {}, double mu_rel = 1e-10)
      : grid_(grid), par_(par), quad_(quad) {
    if (par.dim() != grid.dim()) throw std::invalid_argument("DirichletProblem: parameter dimension mismatch");
    if (load.grid.dim() != grid.dim()) throw std::invalid_argument("DirichletProblem: load dimension mismatch");
    quad_.check(0.0);
    index_unknowns();
    build_load(load);
    double fmax = 0.0;
    for (double b : load.values) fmax = std::max(fmax, std::fabs(b));
    const double mu = mu_rel * (1.0 + fmax);
    dirs_.resize(grid.dim());
    for (int i = 0; i < grid.dim(); ++i) {
      dirs_[i].p = par.p[i];
      dirs_[i].mu = par.p[i] < 2.0 ? mu : 0.0;
      if (par.is_local(i))
        build_local_direction(i);
      else
        build_nonlocal_direction(i);
    }
  }

  long unknown_count() const { return static_cast<long>(unknown_nodes_.size()); }
  const std::vector<double>& load_vector() const { return load_; }
  std::size_t sample_count(int axis) const { return dirs_.at(axis).weight.size(); }

  // Rescaled directional energy S_i(v).
  double direction_energy(int axis, const std::vector<double>& v, int threads = 1) const {
    const Direction& dd = dirs_.at(axis);
    std::vector<double> terms(dd.weight.size());
    for_each_block(dd.weight.size(), threads, [&](std::size_t, std::size_t lo, std::size_t hi) {
      for (std::size_t k = lo; k < hi; ++k) terms[k] = dd.weight[k] * phi(stencil_apply(dd, k, v), dd.p, dd.mu);
    });
    return pairwise_sum(terms);
  }

  double energy(const std::vector<double>& v, int threads = 1) const {
    double e = 0.0;
    for (int i = 0; i < grid_.dim(); ++i) e += direction_energy(i, v, threads) / par_.p[i];
    std::vector<double> lv(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) lv[j] = load_[j] * v[j];
    return e - pairwise_sum(lv);
  }

  void gradient(const std::vector<double>& v, std::vector<double>& g, int threads = 1) const {
    g.assign(v.size(), 0.0);
    for (int i = 0; i < grid_.dim(); ++i) {
      const Direction& dd = dirs_[i];
      std::vector<double> t(dd.weight.size());
      for_each_block(dd.weight.size(), threads, [&](std::size_t, std::size_t lo, std::size_t hi) {
        for (std::size_t k = lo; k < hi; ++k)
          t[k] = dd.weight[k] * dphi_over_p(stencil_apply(dd, k, v), dd.p, dd.mu);
      });
      for (std::size_t k = 0; k < dd.weight.size(); ++k) {
        const double tk = t[k];
        if (tk == 0.0) continue;
        for (int e = dd.start[k]; e < dd.start[k + 1]; ++e) g[dd.offs[e]] += tk * dd.coef[e];
      }
    }
    for (std::size_t j = 0; j < v.size(); ++j) g[j] -= load_[j];
  }

  SolveResult solve(const SolveOptions& opts = {}, int threads = 1) const {
    const std::size_t n = unknown_nodes_.size();
    std::vector<double> v(n, 0.0), g(n), vn(n), gn(n), d(n);
    gradient(v, g, threads);
    double e = energy(v, threads);

    SolveResult res;
    res.energy_history.push_back(e);
    res.status = "max_iter";
    double tau = 1.0;
    for (int it = 0; it < opts.max_iter; ++it) {
      double gsup = 0.0, gsq = 0.0;
      for (double x : g) {
        gsup = std::max(gsup, std::fabs(x));
        gsq += x * x;
      }
      if (gsup <= opts.grad_tol) {
        res.status = "grad_tol";
        res.iterations = it;
        break;
      }
      double step = tau;
      bool accepted = false;
      double en = e;
      for (int bt = 0; bt < opts.max_backtracks; ++bt) {
        for (std::size_t j = 0; j < n; ++j) vn[j] = v[j] - step * g[j];
        en = energy(vn, threads);
        if (en <= e - opts.armijo_c * step * gsq) {
          accepted = true;
          break;
        }
        step *= opts.backtrack;
      }
      if (!accepted) {
        res.status = "line_search_stall";
        res.iterations = it;
        break;
      }
      gradient(vn, gn, threads);
      double dv_dv = 0.0, dv_dg = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double dvj = vn[j] - v[j], dgj = gn[j] - g[j];
        dv_dv += dvj * dvj;
        dv_dg += dvj * dgj;
      }
      tau = dv_dg > 0.0 ? std::min(std::max(dv_dv / dv_dg, 1e-14), 1e14) : 2.0 * step;
      v.swap(vn);
      g.swap(gn);
      e = en;
      res.energy_history.push_back(e);
      res.iterations = it + 1;
      if (opts.verbose && it % 100 == 0) std::fprintf(stderr, "iter %6d energy %.12e grad %.3e\n", it, e, gsup);
      const int w = opts.energy_window;
      if (static_cast<int>(res.energy_history.size()) > w) {
        const double eo = res.energy_history[res.energy_history.size() - 1 - w];
        if (eo - e <= opts.energy_rel_tol * (std::fabs(e) + 1e-300) * w) {
          res.status = "energy_flat";
          break;
        }
      }
    }
    double gsup = 0.0;
    gradient(v, g, threads);
    for (double x : g) gsup = std::max(gsup, std::fabs(x));
    res.weak_residual = gsup;
    res.energy = e;
    for (int i = 0; i < grid_.dim(); ++i) res.direction_energy.push_back(direction_energy(i, v, threads));
    res.u = lift(v);
    return res;
  }

  GridFunction lift(const std::vector<double>& v) const {
    GridFunction u(grid_);
    u.provenance = Provenance::derived_numeric;
    for (std::size_t j = 0; j < v.size(); ++j) u.values[unknown_nodes_[j]] = v[j];
    return u;
  }

 private:
  struct Direction {
    std::vector<int> start;   // sample k owns entries [start[k], start[k+1])
    std::vector<int> offs;    // unknown indices
    std::vector<double> coef;
    std::vector<double> weight;
    double p = 2.0;
    double mu = 0.0;
    Direction() { start.push_back(0); }
  };

  static double phi(double g, double p, double mu) {
    if (mu == 0.0) return detail::pow_abs(g, p);
    return std::pow(g * g + mu * mu, 0.5 * p) - std::pow(mu, p);
  }
  // phi'(g)/p, the duality map with smoothing.
  static double dphi_over_p(double g, double p, double mu) {
    if (mu == 0.0) {
      if (g == 0.0) return 0.0;
      return detail::pow_abs(g, p - 1.0) * (g > 0.0 ? 1.0 : -1.0);
    }
    return g * std::pow(g * g + mu * mu, 0.5 * p - 1.0);
  }

  static double stencil_apply(const Direction& dd, std::size_t k, const std::vector<double>& v) {
    double g = 0.0;
    for (int e = dd.start[k]; e < dd.start[k + 1]; ++e) g += dd.coef[e] * v[dd.offs[e]];
    return g;
  }

  void index_unknowns() {
    node_to_unknown_.assign(static_cast<std::size_t>(grid_.node_count()), -1);
    MultiIndex mi(grid_.node_extents());
    for (long flat = 0; !mi.done; ++flat, mi.advance()) {
      bool interior = true;
      for (int a = 0; a < grid_.dim(); ++a) interior = interior && mi.idx[a] > 0 && mi.idx[a] < grid_.cells[a];
      if (interior) {
        node_to_unknown_[flat] = static_cast<int>(unknown_nodes_.size());
        unknown_nodes_.push_back(flat);
      }
    }
    if (unknown_nodes_.empty()) throw std::invalid_argument("DirichletProblem: grid has no interior nodes");
  }

  // b_j = int f phi_j, midpoint per cell with the multilinear hat averaged
  // to the center: each adjacent cell contributes vol f(center) / 2^d.
  void build_load(const GridFunction& f) {
    load_.assign(unknown_nodes_.size(), 0.0);
    const int d = grid_.dim();
    const double share = grid_.cell_volume() / static_cast<double>(1 << d);
    MultiIndex mi(grid_.cells);
    while (!mi.done) {
      double c[max_dim];
      for (int a = 0; a < d; ++a) c[a] = grid_.center_coord(a, mi.idx[a]);
      const double fv = f.midpoint_value(c);
      if (fv != 0.0) {
        for (int corner = 0; corner < (1 << d); ++corner) {
          long idx[max_dim];
          for (int a = 0; a < d; ++a) idx[a] = mi.idx[a] + ((corner >> a) & 1);
          const int uj = node_to_unknown_[grid_.node_flat(idx)];
          if (uj >= 0) load_[uj] += share * fv;
        }
      }
      mi.advance();
    }
  }

  void push_sample(Direction& dd, const long* nodes, const double* wts, int cnt, double weight) {
    int added = 0;
    for (int e = 0; e < cnt; ++e) {
      const int uj = node_to_unknown_[nodes[e]];
      if (uj < 0 || wts[e] == 0.0) continue;
      dd.offs.push_back(uj);
      dd.coef.push_back(wts[e]);
      ++added;
    }
    if (added == 0) return;
    dd.start.push_back(static_cast<int>(dd.offs.size()));
    dd.weight.push_back(weight);
  }

  // Two-point differences across cells: for each axis edge (j, j+e_i) the
  // quotient (v_+ - v_-)/h enters with weight vol, giving the exact P1
  // stiffness form in 1-D.
  void build_local_direction(int i) {
    Direction& dd = dirs_[i];
    const int d = grid_.dim();
    const double h = grid_.spacing(i);
    const double w = grid_.cell_volume() * std::pow(h, -par_.p[i]) * 2.0 / (par_.p[i] * (1.0 - par_.s[i]));
    std::vector<long> ext = grid_.node_extents();
    ext[i] -= 1;  // edges along axis i
    MultiIndex mi(ext);
    while (!mi.done) {
      long a[max_dim], b[max_dim];
      for (int ax = 0; ax < d; ++ax) a[ax] = b[ax] = mi.idx[ax];
      b[i] += 1;
      const long nodes[2] = {grid_.node_flat(b), grid_.node_flat(a)};
      const double wts[2] = {1.0, -1.0};
      push_sample(dd, nodes, wts, 2, w);
      mi.advance();
    }
  }

  // Horizon term: midpoint outer integral over the delta-padded grid, dyadic
  // Gauss bands in |h| with the power-law core closed analytically at h0.
  void build_nonlocal_direction(int i) {
    Direction& dd = dirs_[i];
    const int d = grid_.dim();
    const double s = par_.s[i], p = par_.p[i], delta = par_.delta[i];
    const double alpha = p * (1.0 - s);
    const double rescale = std::pow(delta, -alpha);
    const int levels = detail::effective_levels(quad_.levels);
    const detail::HPlan plan = detail::dyadic_plan(delta, levels, quad_.points_per_level);
    const double kernel_pow = -(1.0 + s * p);
    std::vector<double> kw(plan.hs.size());
    for (std::size_t q = 0; q < plan.hs.size(); ++q) kw[q] = plan.hw[q] * std::pow(plan.hs[q], kernel_pow);
    const double core_k = std::pow(plan.h0, kernel_pow) * plan.h0 / alpha;

    std::vector<long> pad(d, 0);
    pad[i] = static_cast<long>(std::ceil(delta / grid_.spacing(i)));
    const UniformGrid outer = grid_.padded(pad);
    const double vol = outer.cell_volume();

    long nx[1 << max_dim], ny[1 << max_dim], merged_n[2 << max_dim];
    double wx[1 << max_dim], wy[1 << max_dim], merged_w[2 << max_dim];
    MultiIndex mi(outer.cells);
    while (!mi.done) {
      double x[max_dim], y[max_dim];
      for (int a = 0; a < d; ++a) x[a] = y[a] = outer.center_coord(a, mi.idx[a]);
      const int cx = detail::interp_stencil(grid_, x, nx, wx);
      for (int sign = -1; sign <= 1; sign += 2) {
        for (std::size_t q = 0; q <= plan.hs.size(); ++q) {
          const double h = q < plan.hs.size() ? plan.hs[q] : plan.h0;
          const double wq = q < plan.hs.size() ? kw[q] : core_k;
          y[i] = x[i] + sign * h;
          const int cy = detail::interp_stencil(grid_, y, ny, wy);
          if (cx == 0 && cy == 0) continue;
          int cnt = 0;
          for (int e = 0; e < cy; ++e) {
            merged_n[cnt] = ny[e];
            merged_w[cnt] = wy[e];
            ++cnt;
          }
          for (int e = 0; e < cx; ++e) {
            bool found = false;
            for (int m = 0; m < cnt && !found; ++m)
              if (merged_n[m] == nx[e]) {
                merged_w[m] -= wx[e];
                found = true;
              }
            if (!found) {
              merged_n[cnt] = nx[e];
              merged_w[cnt] = -wx[e];
              ++cnt;
            }
          }
          push_sample(dd, merged_n, merged_w, cnt, vol * wq * rescale);
        }
      }
      mi.advance();
    }
  }

  UniformGrid grid_;
  AnisotropyParams par_;
  SingularQuadSpec quad_;
  std::vector<long> unknown_nodes_;
  std::vector<int> node_to_unknown_;
  std::vector<double> load_;
  std::vector<Direction> dirs_;
};

struct DeltaStudyRow {
  std::vector<double> delta;
  double distance = 0.0;  // || u_k - u_0 ||_{p_min} over the box
  double residual = 0.0;
  int iterations = 0;
};

struct DeltaStudyReport {
  std::vector<DeltaStudyRow> rows;
  GridFunction u0;
  std::vector<GridFunction> solutions;
  double u0_norm = 0.0;
  double final_rel = 0.0;
  bool monotone = false;  // distances nonincreasing along the path
};

// Solve along a horizon path and measure the L^{p_min} distance to the
// local (all delta = 0) solution.
inline DeltaStudyReport delta_convergence_study(const UniformGrid& grid, const std::vector<double>& s,
                                                const std::vector<double>& p, const GridFunction& load,
                                                const std::vector<std::vector<double>>& delta_path,
                                                const SingularQuadSpec& quad = {}, const SolveOptions& opts = {},
                                                int threads = 1, double monotone_tol = 1e-9) {
  const double pmin = *std::min_element(p.begin(), p.end());
  DeltaStudyReport rep;
  {
    const AnisotropyParams local(s, p, std::vector<double>(s.size(), 0.0));
    DirichletProblem prob(grid, local, load, quad);
    rep.u0 = prob.solve(opts, threads).u;
  }
  rep.u0_norm = lp_norm(rep.u0, pmin, threads);
  for (const auto& dk : delta_path) {
    const AnisotropyParams par(s, p, dk);
    DirichletProblem prob(grid, par, load, quad);
    const SolveResult sol = prob.solve(opts, threads);
    GridFunction diff = sol.u;
    for (std::size_t j = 0; j < diff.values.size(); ++j) diff.values[j] -= rep.u0.values[j];
    diff.source.reset();
    DeltaStudyRow row;
    row.delta = dk;
    row.distance = lp_norm(diff, pmin, threads);
    row.residual = sol.weak_residual;
    row.iterations = sol.iterations;
    rep.rows.push_back(row);
    rep.solutions.push_back(sol.u);
  }
  rep.monotone = true;
  for (std::size_t k = 1; k < rep.rows.size(); ++k)
    rep.monotone = rep.monotone && rep.rows[k].distance <= rep.rows[k - 1].distance + monotone_tol;
  if (!rep.rows.empty()) rep.final_rel = rep.rows.back().distance / rep.u0_norm;
  return rep;
}

}
