#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "nonlocal.hpp"
#include "test_functions.hpp"

// Horizon and order sweeps that compare rescaled nonlocal energies against
// their local limits:
//
//   delta -> 0:  [u]_i / delta^{p(1-s)}  ->  2/(p(1-s)) ||d_i u||_p^p
//   s -> 1:      (1-s) J_{s,p(.,.)}(u)   ->  int 2/pbar(x) |d_1 u|^{pbar(x)} dx
//
// Ratios are extrapolated with a first-order-in-the-parameter Richardson
// step from the two finest samples.

namespace perifrac {

struct SweepResult {
  std::vector<double> params;   // delta or s values, in sweep order
  std::vector<double> ratios;   // rescaled energies
  std::vector<double> abs_err;  // |ratio - target|
  std::vector<double> rel_err;
  double target = 0.0;
  double extrapolated = 0.0;
  double extrap_rel_err = 0.0;
  double final_rel_err = 0.0;
  bool monotone = false;  // |ratio - target| nonincreasing along the sweep
  int interp_order = 1;
};

namespace detail {

inline bool nonincreasing(const std::vector<double>& v, double slack = 0.0) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[i - 1] * (1.0 + slack) + 1e-300) return false;
  return true;
}

// First-order Richardson step in eps from the two finest samples
// (value = limit + C eps): limit ~ v_n + (v_n - v_{n-1}) eps_n / (eps_{n-1} - eps_n).
inline double richardson_first_order(double eps_prev, double v_prev, double eps_last, double v_last) {
  return v_last + (v_last - v_prev) * eps_last / (eps_prev - eps_last);
}

}  // namespace detail

// Local directional energy 2/(p(1-s)) ||d_axis u||_p^p with the derivative
// taken analytically (sampled functions keep their closed form).
inline double local_directional_energy(const GridFunction& u, int axis, double s, double p, int threads = 1) {
  const GridFunction du = partial_derivative(u, axis);
  return 2.0 / (p * (1.0 - s)) * lp_modular(du, p, threads).value;
}

inline SweepResult bbm_delta_sweep(const std::shared_ptr<const TestFunction>& f, const UniformGrid& grid, int axis,
                                   double s, double p, const std::vector<double>& deltas,
                                   const SingularQuadSpec& spec) {
  if (!f->twice_differentiable())
    throw std::invalid_argument("bbm_delta_sweep: needs a C2 test function with a derivative");
  if (deltas.size() < 2) throw std::invalid_argument("bbm_delta_sweep: need at least two horizons");
  for (std::size_t i = 1; i < deltas.size(); ++i)
    if (!(deltas[i] < deltas[i - 1])) throw std::invalid_argument("bbm_delta_sweep: horizons must decrease");

  const GridFunction u = sample(f, grid);
  SweepResult res;
  res.target = local_directional_energy(u, axis, s, p, spec.threads);
  const double alpha = p * (1.0 - s);
  for (double delta : deltas) {
    const EnergyReport rep = peridynamic_seminorm(u, axis, s, p, delta, spec);
    res.interp_order = rep.interp_order;
    res.params.push_back(delta);
    res.ratios.push_back(rep.value / std::pow(delta, alpha));
  }
  for (double r : res.ratios) {
    res.abs_err.push_back(std::fabs(r - res.target));
    res.rel_err.push_back(std::fabs(r - res.target) / std::fabs(res.target));
  }
  const std::size_t n = res.params.size();
  res.extrapolated = detail::richardson_first_order(res.params[n - 2], res.ratios[n - 2], res.params[n - 1],
                                                    res.ratios[n - 1]);
  res.extrap_rel_err = std::fabs(res.extrapolated - res.target) / std::fabs(res.target);
  res.final_rel_err = res.rel_err.back();
  res.monotone = detail::nonincreasing(res.abs_err, 1e-12);
  return res;
}

struct LiminfCheckReport {
  std::vector<double> deltas;
  std::vector<double> ratios;
  double target = 0.0;
  double tail_min = 0.0;
  bool pass = false;
};

// Along u_k -> u, delta_k -> 0 the local energy must not exceed the liminf of
// the rescaled energies; checked against the minimum over the sequence tail.
inline LiminfCheckReport bbm_sequence_liminf_check(const std::vector<GridFunction>& u_list,
                                                   const std::vector<double>& delta_list, const GridFunction& u_limit,
                                                   int axis, double s, double p, const SingularQuadSpec& spec,
                                                   double rel_tol = 1e-2) {
  if (u_list.size() != delta_list.size() || u_list.empty())
    throw std::invalid_argument("bbm_sequence_liminf_check: need matching nonempty sequences");
  LiminfCheckReport rep;
  rep.target = local_directional_energy(u_limit, axis, s, p, spec.threads);
  const double alpha = p * (1.0 - s);
  for (std::size_t k = 0; k < u_list.size(); ++k) {
    const double val = peridynamic_seminorm(u_list[k], axis, s, p, delta_list[k], spec).value;
    rep.deltas.push_back(delta_list[k]);
    rep.ratios.push_back(val / std::pow(delta_list[k], alpha));
  }
  const std::size_t tail = rep.ratios.size() / 2;
  rep.tail_min = *std::min_element(rep.ratios.begin() + tail, rep.ratios.end());
  rep.pass = rep.target <= rep.tail_min * (1.0 + rel_tol);
  return rep;
}

// Variable-exponent local target int 2/pbar(x) |d_axis u|^{pbar(x)} dx.
inline double local_varexp_energy(const GridFunction& u, int axis, const ExponentField& field, int threads = 1) {
  const GridFunction du = partial_derivative(u, axis);
  const UniformGrid& g = du.grid;
  const double vol = g.cell_volume();
  return blocked_sum(static_cast<std::size_t>(g.cell_count()), threads, [&](std::size_t f) {
    long idx[max_dim];
    double c[max_dim];
    g.cell_unflatten(static_cast<long>(f), idx);
    for (int a = 0; a < g.dim(); ++a) c[a] = g.center_coord(a, idx[a]);
    const double pb = field.diagonal(c);
    return vol * (2.0 / pb) * detail::pow_abs(du.midpoint_value(c), pb);
  });
}

inline SweepResult bbm_s_sweep_varexp(const std::shared_ptr<const TestFunction>& f, const UniformGrid& grid, int axis,
                                      const ExponentField& field, const std::vector<double>& s_list,
                                      const SingularQuadSpec& spec) {
  if (!f->twice_differentiable())
    throw std::invalid_argument("bbm_s_sweep_varexp: needs a C2 test function with a derivative");
  if (s_list.size() < 2) throw std::invalid_argument("bbm_s_sweep_varexp: need at least two orders");
  for (std::size_t i = 1; i < s_list.size(); ++i)
    if (!(s_list[i] > s_list[i - 1])) throw std::invalid_argument("bbm_s_sweep_varexp: orders must increase");

  const GridFunction u = sample(f, grid);
  SweepResult res;
  res.target = local_varexp_energy(u, axis, field, spec.threads);
  for (double s : s_list) {
    const DirectionalModular dm = directional_modular_varexp(u, axis, s, field, spec);
    res.interp_order = dm.report.interp_order;
    res.params.push_back(s);
    res.ratios.push_back((1.0 - s) * dm.report.value);
  }
  for (double r : res.ratios) {
    res.abs_err.push_back(std::fabs(r - res.target));
    res.rel_err.push_back(std::fabs(r - res.target) / std::fabs(res.target));
  }
  const std::size_t n = res.params.size();
  res.extrapolated = detail::richardson_first_order(1.0 - res.params[n - 2], res.ratios[n - 2],
                                                    1.0 - res.params[n - 1], res.ratios[n - 1]);
  res.extrap_rel_err = std::fabs(res.extrapolated - res.target) / std::fabs(res.target);
  res.final_rel_err = res.rel_err.back();
  res.monotone = detail::nonincreasing(res.abs_err, 1e-12);
  return res;
}

struct GammaPathReport {
  std::vector<std::vector<double>> deltas;  // [step][axis]
  std::vector<std::vector<double>> values;  // [step][axis] scaled directional energies
  std::vector<double> targets;              // per-axis limit values
  std::vector<double> final_rel_err;        // per axis
  std::vector<bool> fixed_axis;             // horizon constant along the path
  std::vector<double> fixed_drift;          // max |value - target| on fixed axes
  bool pass = true;
};

// Desk check that the summed energy converges along a horizon path
// delta_k -> delta_0 for a fixed smooth u: vanishing axes approach their
// local limit, fixed axes stay put.
inline GammaPathReport gamma_energy_convergence(const std::shared_ptr<const TestFunction>& f, const UniformGrid& grid,
                                                const AnisotropyParams& par,
                                                const std::vector<std::vector<double>>& delta_path,
                                                const std::vector<double>& delta_limit, const SingularQuadSpec& spec,
                                                double vanish_rel_tol = 0.05, double fixed_tol = 1e-9) {
  const int d = grid.dim();
  if (par.dim() != d) throw std::invalid_argument("gamma_energy_convergence: parameter dimension mismatch");
  if (static_cast<int>(delta_limit.size()) != d)
    throw std::invalid_argument("gamma_energy_convergence: limit horizon dimension mismatch");
  const GridFunction u = sample(f, grid);

  GammaPathReport rep;
  rep.targets.resize(d);
  rep.fixed_axis.resize(d);
  rep.final_rel_err.assign(d, 0.0);
  rep.fixed_drift.assign(d, 0.0);
  for (int i = 0; i < d; ++i) {
    if (delta_limit[i] == 0.0)
      rep.targets[i] = local_directional_energy(u, i, par.s[i], par.p[i], spec.threads);
    else
      rep.targets[i] = peridynamic_seminorm(u, i, par.s[i], par.p[i], delta_limit[i], spec).value /
                       std::pow(delta_limit[i], par.p[i] * (1.0 - par.s[i]));
    bool fixed = true;
    for (const auto& dk : delta_path) fixed = fixed && dk[i] == delta_limit[i];
    rep.fixed_axis[i] = fixed;
  }
  for (const auto& dk : delta_path) {
    if (static_cast<int>(dk.size()) != d)
      throw std::invalid_argument("gamma_energy_convergence: path entry dimension mismatch");
    std::vector<double> row(d);
    for (int i = 0; i < d; ++i) {
      if (dk[i] == 0.0)
        row[i] = rep.targets[i];  // axis already at its local limit
      else
        row[i] = peridynamic_seminorm(u, i, par.s[i], par.p[i], dk[i], spec).value /
                 std::pow(dk[i], par.p[i] * (1.0 - par.s[i]));
    }
    rep.deltas.push_back(dk);
    rep.values.push_back(row);
  }
  for (int i = 0; i < d; ++i) {
    const double last = rep.values.back()[i];
    rep.final_rel_err[i] = std::fabs(last - rep.targets[i]) / std::max(1e-300, std::fabs(rep.targets[i]));
    if (rep.fixed_axis[i]) {
      for (const auto& row : rep.values)
        rep.fixed_drift[i] = std::max(rep.fixed_drift[i], std::fabs(row[i] - rep.targets[i]));
      rep.pass = rep.pass && rep.fixed_drift[i] <= fixed_tol;
    } else {
      rep.pass = rep.pass && rep.final_rel_err[i] <= vanish_rel_tol;
    }
  }
  return rep;
}

}
