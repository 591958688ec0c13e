#pragma once

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "grid.hpp"

// Variable integrability exponents p(x,y), their diagonal traces p(x,x),
// per-axis anisotropy parameters and the critical exponent attached to them.

namespace perifrac {

enum class ExponentKind { constant, separable_sum, radial_distance };

inline const char* to_string(ExponentKind k) {
  switch (k) {
    case ExponentKind::constant: return "constant";
    case ExponentKind::separable_sum: return "separable_sum";
    case ExponentKind::radial_distance: return "radial_distance";
  }
  return "?";
}

// Families with certified bounds:
//   constant:         p(x,y) = base
//   separable_sum:    p(x,y) = base + (a(x)+a(y))/2,  a(x) = amp * clamp01(dir.x + offset)
//   radial_distance:  p(x,y) = base + amp * exp(-(|x-y|/width)^2)
// All are continuous and symmetric by construction, with values in
// [base + min(0,amp), base + max(0,amp)].
struct ExponentField {
  ExponentKind kind = ExponentKind::constant;
  int dim = 1;
  double base = 2.0;
  double amplitude = 0.0;
  std::vector<double> direction;  // separable_sum
  double offset = 0.0;            // separable_sum
  double width = 1.0;             // radial_distance
  Box probe_box;                  // lattice used by symmetry / bound probes

  static ExponentField constant(int dim, double value, const Box& probe) {
    ExponentField f;
    f.kind = ExponentKind::constant;
    f.dim = dim;
    f.base = value;
    f.probe_box = probe;
    f.check();
    return f;
  }

  static ExponentField separable(int dim, double base, double amp, std::vector<double> dir, double offset,
                                 const Box& probe) {
    ExponentField f;
    f.kind = ExponentKind::separable_sum;
    f.dim = dim;
    f.base = base;
    f.amplitude = amp;
    f.direction = std::move(dir);
    f.offset = offset;
    f.probe_box = probe;
    if (static_cast<int>(f.direction.size()) != dim)
      throw std::invalid_argument("ExponentField: direction size must equal dim");
    f.check();
    return f;
  }

  static ExponentField radial(int dim, double base, double amp, double width, const Box& probe) {
    ExponentField f;
    f.kind = ExponentKind::radial_distance;
    f.dim = dim;
    f.base = base;
    f.amplitude = amp;
    f.width = width;
    f.probe_box = probe;
    if (!(width > 0.0)) throw std::invalid_argument("ExponentField: width must be positive");
    f.check();
    return f;
  }

  void check() const {
    if (dim < 1 || dim > max_dim) throw std::invalid_argument("ExponentField: dim must be 1..3");
    if (probe_box.dim() != dim) throw std::invalid_argument("ExponentField: probe box dimension mismatch");
    if (!(pminus() > 1.0))
      throw std::invalid_argument("ExponentField: lower bound must exceed 1, got " + std::to_string(pminus()));
  }

  double pminus() const { return base + std::min(0.0, amplitude); }
  double pplus() const { return base + std::max(0.0, amplitude); }

  static double clamp01(double t) { return t <= 0.0 ? 0.0 : (t >= 1.0 ? 1.0 : t); }

  double scalar_part(const double* x) const {
    double t = offset;
    for (int a = 0; a < dim; ++a) t += direction[a] * x[a];
    return amplitude * clamp01(t);
  }

  double eval(const double* x, const double* y) const {
    switch (kind) {
      case ExponentKind::constant:
        return base;
      case ExponentKind::separable_sum:
        return base + 0.5 * (scalar_part(x) + scalar_part(y));
      case ExponentKind::radial_distance: {
        double d2 = 0.0;
        for (int a = 0; a < dim; ++a) {
          const double t = x[a] - y[a];
          d2 += t * t;
        }
        return base + amplitude * std::exp(-d2 / (width * width));
      }
    }
    return base;
  }

  // Diagonal trace p(x,x).
  double diagonal(const double* x) const {
    switch (kind) {
      case ExponentKind::constant: return base;
      case ExponentKind::separable_sum: return base + scalar_part(x);
      case ExponentKind::radial_distance: return base + amplitude;
    }
    return base;
  }

  bool is_constant() const { return kind == ExponentKind::constant || amplitude == 0.0; }
};

// Pointwise exponent r(x): the diagonal trace of a pair field. A constant
// scalar exponent is the diagonal of a constant field.
struct ScalarExponentField {
  ExponentField field;

  ScalarExponentField() = default;
  explicit ScalarExponentField(ExponentField f) : field(std::move(f)) {}

  static ScalarExponentField constant(int dim, double value) {
    Box probe(std::vector<double>(dim, -1.0), std::vector<double>(dim, 1.0));
    return ScalarExponentField(ExponentField::constant(dim, value, probe));
  }

  double eval(const double* x) const { return field.diagonal(x); }
  double rminus() const { return field.pminus(); }
  double rplus() const { return field.pplus(); }
  bool is_constant() const { return field.is_constant(); }
};

// Per-axis orders s_i in (0,1), exponents p_i in (1,inf) and horizons
// delta_i >= 0; delta_i = 0 marks an axis treated by its local functional.
struct AnisotropyParams {
  std::vector<double> s, p, delta;

  AnisotropyParams() = default;
  AnisotropyParams(std::vector<double> sv, std::vector<double> pv, std::vector<double> dv)
      : s(std::move(sv)), p(std::move(pv)), delta(std::move(dv)) {
    if (s.empty() || s.size() != p.size() || s.size() != delta.size())
      throw std::invalid_argument("AnisotropyParams: s, p, delta must have equal nonzero size");
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!(s[i] > 0.0 && s[i] < 1.0)) throw std::invalid_argument("AnisotropyParams: s must lie in (0,1)");
      if (!(p[i] > 1.0)) throw std::invalid_argument("AnisotropyParams: p must exceed 1");
      if (!(delta[i] >= 0.0)) throw std::invalid_argument("AnisotropyParams: delta must be nonnegative");
    }
  }

  int dim() const { return static_cast<int>(s.size()); }
  bool is_local(int axis) const { return delta[axis] == 0.0; }
};

// Joint admissibility report for a pair field: symmetry on a probe lattice,
// lower bound > 1, and upper bound < N/s where the fractional-space side
// requires it. Callers decide which halves are binding for them.
struct ExponentFieldReport {
  bool symmetric = false;
  bool lower_ok = false;
  bool upper_ok = false;
  double pminus = 0.0, pplus = 0.0;
  double n_over_s = 0.0;
  double symmetry_residual = 0.0;
  double probe_min = 0.0, probe_max = 0.0;  // field range seen on the lattice
  bool pass() const { return symmetric && lower_ok && upper_ok; }
};

inline ExponentFieldReport validate_exponents(const ExponentField& field, double s, int dim,
                                              int probes_per_axis = 7) {
  if (dim != field.dim) throw std::invalid_argument("validate_exponents: dimension mismatch");
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("validate_exponents: s must lie in (0,1)");
  ExponentFieldReport rep;
  rep.pminus = field.pminus();
  rep.pplus = field.pplus();
  rep.n_over_s = static_cast<double>(dim) / s;
  rep.lower_ok = rep.pminus > 1.0;
  rep.upper_ok = rep.pplus < rep.n_over_s;

  std::vector<std::vector<double>> pts;
  std::vector<long> ext(dim, probes_per_axis);
  for (MultiIndex mi(ext); !mi.done; mi.advance()) {
    std::vector<double> x(dim);
    for (int a = 0; a < dim; ++a) {
      const double t = static_cast<double>(mi.idx[a]) / static_cast<double>(probes_per_axis - 1);
      x[a] = field.probe_box.lo[a] + t * field.probe_box.extent(a);
    }
    pts.push_back(std::move(x));
  }
  double res = 0.0, lo = field.eval(pts[0].data(), pts[0].data()), hi = lo;
  for (const auto& x : pts)
    for (const auto& y : pts) {
      const double pxy = field.eval(x.data(), y.data());
      const double pyx = field.eval(y.data(), x.data());
      res = std::max(res, std::fabs(pxy - pyx));
      lo = std::min(lo, pxy);
      hi = std::max(hi, pxy);
    }
  rep.symmetry_residual = res;
  rep.symmetric = res == 0.0;
  rep.probe_min = lo;
  rep.probe_max = hi;
  return rep;
}

struct CriticalExponents {
  double sbar = 0.0;   // harmonic mean of the s_i
  double spbar = 0.0;  // harmonic mean of the products s_i p_i
  double pstar = 0.0;
};

// sbar  = (1/n sum 1/s_i)^-1, spbar = (1/n sum 1/(s_i p_i))^-1,
// pstar = n (spbar/sbar) / (n - spbar); requires spbar < n.
inline CriticalExponents critical_exponent(const AnisotropyParams& par, int dim) {
  if (par.dim() != dim) throw std::invalid_argument("critical_exponent: dimension mismatch");
  CriticalExponents ce;
  double inv_s = 0.0, inv_sp = 0.0;
  for (int i = 0; i < dim; ++i) {
    inv_s += 1.0 / par.s[i];
    inv_sp += 1.0 / (par.s[i] * par.p[i]);
  }
  ce.sbar = static_cast<double>(dim) / inv_s;
  ce.spbar = static_cast<double>(dim) / inv_sp;
  if (!(ce.spbar < static_cast<double>(dim))) {
    std::ostringstream os;
    os << "critical_exponent: supercritical parameters, spbar = " << ce.spbar << " >= n = " << dim;
    throw std::domain_error(os.str());
  }
  ce.pstar = static_cast<double>(dim) * (ce.spbar / ce.sbar) / (static_cast<double>(dim) - ce.spbar);
  return ce;
}

}
