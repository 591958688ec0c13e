#pragma once

#include <cfloat>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "exponents.hpp"
#include "grid_ops.hpp"

// Modulars as cached quadrature samples and the gauge norm they induce:
// a modular here is a finite sum  rho(u/lambda) = sum_q c_q lambda^{-e_q}
// with c_q >= 0, so rescaling never re-runs the quadrature. The norm is the
// unique lambda with rho(u/lambda) = 1, found by bisection.

namespace perifrac {

enum class ModularKind { lebesgue_plain, lebesgue_weighted, gagliardo, directional_varexp, peridynamic_const };

inline const char* to_string(ModularKind k) {
  switch (k) {
    case ModularKind::lebesgue_plain: return "lebesgue_plain";
    case ModularKind::lebesgue_weighted: return "lebesgue_weighted";
    case ModularKind::gagliardo: return "gagliardo";
    case ModularKind::directional_varexp: return "directional_varexp";
    case ModularKind::peridynamic_const: return "peridynamic_const";
  }
  return "?";
}

struct ModularSamples {
  std::vector<double> coef;  // nonnegative, already includes quadrature weights
  std::vector<double> expo;  // exponent attached to each sample
  double emin = std::numeric_limits<double>::infinity();
  double emax = 0.0;
  bool constant_exponent = true;
  double error_estimate = 0.0;
  std::string convention;  // "plain" or "weighted"
  mutable double cached_value = std::numeric_limits<double>::quiet_NaN();

  void reserve(std::size_t n) {
    coef.reserve(n);
    expo.reserve(n);
  }

  void add(double c, double e) {
    coef.push_back(c);
    expo.push_back(e);
    if (coef.size() > 1 && e != expo.front()) constant_exponent = false;
    emin = std::min(emin, e);
    emax = std::max(emax, e);
    cached_value = std::numeric_limits<double>::quiet_NaN();
  }

  std::size_t size() const { return coef.size(); }

  // rho(u) at scale 1
  double value() const {
    if (std::isnan(cached_value)) cached_value = pairwise_sum(coef);
    return cached_value;
  }

  // rho(u/lambda)
  double value_at(double lambda) const {
    if (lambda == 1.0) return value();
    if (constant_exponent && !coef.empty())
      return value() * std::pow(lambda, -expo.front());
    std::vector<double> terms(coef.size());
    for (std::size_t i = 0; i < coef.size(); ++i) terms[i] = coef[i] * std::pow(lambda, -expo[i]);
    return pairwise_sum(terms);
  }
};

struct LuxemburgResult {
  double norm = 0.0;
  double modular_at_norm = 0.0;
  int iterations = 0;
  double bracket_lo = 0.0, bracket_hi = 0.0;
  bool converged = true;
};

// Bisection on the strictly decreasing map lambda -> rho(u/lambda).
// Initial scale max(m0^(1/e_min), m0^(1/e_max)) brackets the root from above;
// the lower end starts at eps^(1/4) times the scale and is pushed down if the
// modular is still small there.
inline LuxemburgResult luxemburg_norm(const ModularSamples& m, double rel_tol = 1e-12) {
  LuxemburgResult r;
  const double m0 = m.value();
  if (!(m0 > 0.0)) {
    r.norm = 0.0;
    r.modular_at_norm = 0.0;
    return r;
  }
  if (!std::isfinite(m0)) throw std::domain_error("luxemburg_norm: modular is not finite");
  const double scale = std::max(std::pow(m0, 1.0 / m.emin), std::pow(m0, 1.0 / m.emax));
  double hi = scale;
  int guard = 0;
  while (m.value_at(hi) >= 1.0) {
    hi *= 2.0;
    if (++guard > 200) throw std::domain_error("luxemburg_norm: failed to bracket from above");
  }
  double lo = std::pow(DBL_EPSILON, 0.25) * scale;
  lo = std::min(lo, 0.5 * hi);
  guard = 0;
  while (m.value_at(lo) <= 1.0) {
    lo *= 0.5;
    if (++guard > 2000) throw std::domain_error("luxemburg_norm: failed to bracket from below");
  }
  int it = 0;
  while ((hi - lo) / hi > rel_tol && it < 200) {
    const double mid = 0.5 * (lo + hi);
    if (m.value_at(mid) > 1.0)
      lo = mid;
    else
      hi = mid;
    ++it;
  }
  r.norm = 0.5 * (lo + hi);
  r.modular_at_norm = m.value_at(r.norm);
  r.iterations = it;
  r.bracket_lo = lo;
  r.bracket_hi = hi;
  r.converged = (hi - lo) / hi <= rel_tol;
  return r;
}

// Lebesgue modular int |u|^{r(x)} dx, optionally carrying the 1/r(x) weight,
// as reusable samples (one per grid cell, midpoint rule).
inline ModularSamples lebesgue_modular(const GridFunction& u, const ScalarExponentField& r, bool weighted,
                                       int threads = 1, const Box* omega = nullptr) {
  const UniformGrid& g = u.grid;
  const double vol = g.cell_volume();
  const long ncells = g.cell_count();
  ModularSamples m;
  m.convention = weighted ? "weighted" : "plain";
  std::vector<double> cs(ncells, 0.0), es(ncells, 0.0);
  for_each_block(static_cast<std::size_t>(ncells), threads, [&](std::size_t, std::size_t lo, std::size_t hi) {
    long idx[max_dim];
    double c[max_dim];
    for (std::size_t f = lo; f < hi; ++f) {
      g.cell_unflatten(static_cast<long>(f), idx);
      for (int a = 0; a < g.dim(); ++a) c[a] = g.center_coord(a, idx[a]);
      es[f] = r.eval(c);
      if (omega && !omega->contains(c)) {
        cs[f] = -1.0;  // marker: skip
        continue;
      }
      const double v = u.midpoint_value(c);
      cs[f] = vol * detail::pow_abs(v, es[f]) * (weighted ? 1.0 / es[f] : 1.0);
    }
  });
  m.reserve(cs.size());
  for (long f = 0; f < ncells; ++f)
    if (cs[f] >= 0.0) m.add(cs[f], es[f]);
  // midpoint/trapezoid discrepancy of the unweighted modular as the estimate
  m.error_estimate = lp_modular(u, r, threads, omega).error;
  return m;
}

// Norm/modular comparison relations for a gauge norm and its own modular:
//   rho(u) > 1, = 1, < 1 exactly as ||u|| does, and
//   ||u|| > 1  =>  ||u||^{e-} <= rho(u) <= ||u||^{e+}
//   ||u|| < 1  =>  ||u||^{e+} <= rho(u) <= ||u||^{e-}
struct NormModularReport {
  double norm = 0.0;
  double modular = 0.0;
  double emin = 0.0, emax = 0.0;
  double unit_modular = 0.0;  // rho(u/||u||)
  std::string regime;         // "above_one", "near_one", "below_one", "zero"
  bool sign_ok = false;       // trichotomy agrees
  bool lower_ok = false;      // power bound on the small side
  bool upper_ok = false;      // power bound on the large side
  bool unit_ok = false;       // |rho(u/||u||) - 1| within tolerance
  double tol = 0.0;
  bool pass() const { return sign_ok && lower_ok && upper_ok && unit_ok; }
};

inline NormModularReport norm_modular_relations(const ModularSamples& m, double tol = 1e-8) {
  NormModularReport rep;
  rep.tol = tol;
  rep.emin = m.emin;
  rep.emax = m.emax;
  rep.modular = m.value();
  if (!(rep.modular > 0.0)) {
    rep.regime = "zero";
    rep.sign_ok = rep.lower_ok = rep.upper_ok = rep.unit_ok = true;
    return rep;
  }
  const LuxemburgResult lux = luxemburg_norm(m);
  rep.norm = lux.norm;
  rep.unit_modular = lux.modular_at_norm;
  rep.unit_ok = std::fabs(rep.unit_modular - 1.0) <= tol;
  const double rho = rep.modular, nm = rep.norm;
  if (rho > 1.0 + tol) {
    rep.regime = "above_one";
    rep.sign_ok = nm > 1.0 - tol;
    rep.lower_ok = std::pow(nm, m.emin) <= rho * (1.0 + tol);
    rep.upper_ok = rho <= std::pow(nm, m.emax) * (1.0 + tol);
  } else if (rho < 1.0 - tol) {
    rep.regime = "below_one";
    rep.sign_ok = nm < 1.0 + tol;
    rep.lower_ok = std::pow(nm, m.emax) <= rho * (1.0 + tol);
    rep.upper_ok = rho <= std::pow(nm, m.emin) * (1.0 + tol);
  } else {
    rep.regime = "near_one";
    rep.sign_ok = std::fabs(nm - 1.0) <= std::pow(tol, 1.0 / m.emax) + tol;
    rep.lower_ok = rep.upper_ok = true;
  }
  return rep;
}

}
