#pragma once

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "dirichlet.hpp"
#include "modular.hpp"
#include "nonlocal.hpp"

// First eigenvalue of the homogeneous nonlocal Rayleigh quotient
//
//   H(u) = K(u) / k(u),  Lambda_1 = inf { H(u) : u = 0 outside Omega },
//
// where K is the Luxemburg gauge of the weighted pair modular
// sum 2V^2 |u(x)-u(y)|^{p(x,y)} / (p |x-y|^{N+sp}) over cell-center pairs of
// the margin-padded box, and k the gauge of the weighted Lebesgue modular
// over Omega. u lives on interior nodes (zero boundary and exterior); cell
// values are corner averages. Minimization is gradient descent on H with
// Armijo backtracking, renormalized to k(u)=1 each step.

namespace perifrac {

struct RayleighOptions {
  int max_iter = 4000;
  double grad_tol = 1e-12;    // sup-norm of the quotient gradient
  double flat_rel_tol = 1e-13;
  int flat_window = 20;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 60;
  double lux_rel_tol = 1e-12;
  bool verbose = false;
};

struct RayleighResult {
  double lambda = 0.0;
  GridFunction u;
  double K = 0.0, k = 0.0;
  double S = 0.0;  // unweighted-modular ratio at the normalized minimizer
  double residual = 0.0;
  int iterations = 0;
  int index = 1;  // first eigenvalue
  std::vector<double> history;
  std::string status;
};

struct ResidualReport {
  double rel_residual = 0.0;
  double max_lhs = 0.0;
  double lambda = 0.0;
  double S = 0.0;
};

class RayleighProblem {
 public:
  RayleighProblem(const UniformGrid& omega_grid, double s, const ExponentField& field, double margin,
                  double lux_rel_tol = 1e-12, int threads = 1)
      : grid_(omega_grid), s_(s), lux_rel_tol_(lux_rel_tol), threads_(threads) {
    if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("RayleighProblem: s must lie in (0,1)");
    field.check();
    pq_ = build_pair_quadrature(GridFunction(omega_grid), field, margin, threads);
    pq_.center_values.clear();
    index_unknowns();
    build_cell_stencils();
    build_omega_cells(field);
  }

  long unknown_count() const { return static_cast<long>(unknown_nodes_.size()); }
  const PairQuadrature& pairs() const { return pq_; }
  const UniformGrid& grid() const { return grid_; }
  // Corner-average stencil of padded cell c over unknowns.
  int cell_stencil(long c, const int** offs, const double** wts) const {
    *offs = cs_offs_.data() + cs_start_[c];
    *wts = cs_wts_.data() + cs_start_[c];
    return cs_start_[c + 1] - cs_start_[c];
  }
  const std::vector<long>& omega_cells() const { return ocell_id_; }
  const std::vector<double>& omega_exponents() const { return ocell_p_; }
  double omega_cell_volume() const { return grid_.cell_volume(); }

  std::vector<double> cell_values(const std::vector<double>& v) const {
    std::vector<double> uc(static_cast<std::size_t>(pq_.egrid.cell_count()), 0.0);
    for_each_block(uc.size(), threads_, [&](std::size_t, std::size_t lo, std::size_t hi) {
      for (std::size_t c = lo; c < hi; ++c) {
        double acc = 0.0;
        for (int e = cs_start_[c]; e < cs_start_[c + 1]; ++e) acc += cs_wts_[e] * v[cs_offs_[e]];
        uc[c] = acc;
      }
    });
    return uc;
  }

  // Weighted pair modular of the vector rescaled by 1/lambda.
  ModularSamples pair_modular(const std::vector<double>& uc, bool weighted) const {
    ModularSamples m;
    m.convention = weighted ? "weighted" : "plain";
    m.reserve(pq_.pairs.size());
    std::vector<double> cf(pq_.pairs.size());
    for_each_block(pq_.pairs.size(), threads_, [&](std::size_t, std::size_t lo, std::size_t hi) {
      for (std::size_t k = lo; k < hi; ++k) {
        const auto& pr = pq_.pairs[k];
        const double du = uc[pr.a] - uc[pr.b];
        const double kern = std::pow(pr.dist, -(static_cast<double>(grid_.dim()) + s_ * pr.p));
        cf[k] = pq_.pair_weight * detail::pow_abs(du, pr.p) * kern / (weighted ? pr.p : 1.0);
      }
    });
    for (std::size_t k = 0; k < pq_.pairs.size(); ++k) m.add(cf[k], pq_.pairs[k].p);
    return m;
  }

  ModularSamples lebesgue_modular_omega(const std::vector<double>& uc, bool weighted) const {
    ModularSamples m;
    m.convention = weighted ? "weighted" : "plain";
    m.reserve(ocell_id_.size());
    const double vol = grid_.cell_volume();
    for (std::size_t k = 0; k < ocell_id_.size(); ++k) {
      const double pb = ocell_p_[k];
      m.add(vol * detail::pow_abs(uc[ocell_id_[k]], pb) / (weighted ? pb : 1.0), pb);
    }
    return m;
  }

  double K_norm(const std::vector<double>& v) const {
    return luxemburg_norm(pair_modular(cell_values(v), true), lux_rel_tol_).norm;
  }
  double k_norm(const std::vector<double>& v) const {
    return luxemburg_norm(lebesgue_modular_omega(cell_values(v), false), lux_rel_tol_).norm;
  }
  double rayleigh(const std::vector<double>& v) const {
    const std::vector<double> uc = cell_values(v);
    const double K = luxemburg_norm(pair_modular(uc, true), lux_rel_tol_).norm;
    const double kk = luxemburg_norm(lebesgue_modular_omega(uc, false), lux_rel_tol_).norm;
    if (kk == 0.0) throw std::domain_error("rayleigh: vanishing denominator");
    return K / kk;
  }

  // Unweighted modular ratio S(u) = rho_K(u/K) / rho_k(u/k).
  double S_of(const std::vector<double>& v) const {
    const std::vector<double> uc = cell_values(v);
    const double K = luxemburg_norm(pair_modular(uc, true), lux_rel_tol_).norm;
    const double kk = luxemburg_norm(lebesgue_modular_omega(uc, false), lux_rel_tol_).norm;
    std::vector<double> un = uc, ud = uc;
    for (auto& x : un) x /= K;
    for (auto& x : ud) x /= kk;
    return pair_modular(un, false).value() / lebesgue_modular_omega(ud, false).value();
  }

  // <rho_K'(u/K), phi_j> over unknowns, plus denomK = <rho_K'(u/K), u/K>.
  void numerator_derivative(const std::vector<double>& uc, double K, std::vector<double>& out,
                            double* denomK = nullptr) const {
    std::vector<double> t(pq_.pairs.size());
    const double N = static_cast<double>(grid_.dim());
    for_each_block(pq_.pairs.size(), threads_, [&](std::size_t, std::size_t lo, std::size_t hi) {
      for (std::size_t k = lo; k < hi; ++k) {
        const auto& pr = pq_.pairs[k];
        const double g = (uc[pr.a] - uc[pr.b]) / K;
        if (g == 0.0) {
          t[k] = 0.0;
          continue;
        }
        const double kern = std::pow(pr.dist, -(N + s_ * pr.p));
        t[k] = pq_.pair_weight * kern * detail::pow_abs(g, pr.p - 1.0) * (g > 0.0 ? 1.0 : -1.0);
      }
    });
    if (denomK) {
      std::vector<double> dm(pq_.pairs.size());
      for (std::size_t k = 0; k < pq_.pairs.size(); ++k) dm[k] = t[k] * (uc[pq_.pairs[k].a] - uc[pq_.pairs[k].b]) / K;
      *denomK = pairwise_sum(dm);
    }
    std::vector<double> cg(static_cast<std::size_t>(pq_.egrid.cell_count()), 0.0);
    for (std::size_t k = 0; k < pq_.pairs.size(); ++k) {
      cg[pq_.pairs[k].a] += t[k];
      cg[pq_.pairs[k].b] -= t[k];
    }
    scatter_cells(cg, out);
  }

  // <rho_k'(u/k), phi_j> over unknowns, plus denomk = <rho_k'(u/k), u/k>.
  void denominator_derivative(const std::vector<double>& uc, double kk, std::vector<double>& out,
                              double* denomk = nullptr) const {
    std::vector<double> cg(static_cast<std::size_t>(pq_.egrid.cell_count()), 0.0);
    const double vol = grid_.cell_volume();
    std::vector<double> dm(ocell_id_.size());
    for (std::size_t c = 0; c < ocell_id_.size(); ++c) {
      const double w = uc[ocell_id_[c]] / kk;
      const double pb = ocell_p_[c];
      const double tc = w == 0.0 ? 0.0 : vol * detail::pow_abs(w, pb - 1.0) * (w > 0.0 ? 1.0 : -1.0);
      cg[ocell_id_[c]] = tc;
      dm[c] = tc * w;
    }
    if (denomk) *denomk = pairwise_sum(dm);
    scatter_cells(cg, out);
  }

  // Directional derivative of the K gauge at u along v.
  double dK(const std::vector<double>& u, const std::vector<double>& v) const {
    const std::vector<double> uc = cell_values(u);
    const double K = luxemburg_norm(pair_modular(uc, true), lux_rel_tol_).norm;
    if (K == 0.0) throw std::domain_error("dK: K(u) = 0");
    const std::vector<double> vc = cell_values(v);
    std::vector<double> t(pq_.pairs.size());
    double denomK = 0.0;
    const double N = static_cast<double>(grid_.dim());
    std::vector<double> dnum(pq_.pairs.size()), dden(pq_.pairs.size());
    for (std::size_t k = 0; k < pq_.pairs.size(); ++k) {
      const auto& pr = pq_.pairs[k];
      const double g = (uc[pr.a] - uc[pr.b]) / K;
      if (g == 0.0) {
        dnum[k] = dden[k] = 0.0;
        continue;
      }
      const double kern = std::pow(pr.dist, -(N + s_ * pr.p));
      const double tk = pq_.pair_weight * kern * detail::pow_abs(g, pr.p - 1.0) * (g > 0.0 ? 1.0 : -1.0);
      dnum[k] = tk * (vc[pr.a] - vc[pr.b]);
      dden[k] = tk * g;
    }
    denomK = pairwise_sum(dden);
    if (denomK == 0.0) throw std::domain_error("dK: degenerate modular");
    return pairwise_sum(dnum) / denomK;
  }

  // Directional derivative of the k gauge at u along v.
  double dk(const std::vector<double>& u, const std::vector<double>& v) const {
    const std::vector<double> uc = cell_values(u);
    const double kk = luxemburg_norm(lebesgue_modular_omega(uc, false), lux_rel_tol_).norm;
    if (kk == 0.0) throw std::domain_error("dk: k(u) = 0");
    const std::vector<double> vc = cell_values(v);
    const double vol = grid_.cell_volume();
    std::vector<double> dnum(ocell_id_.size()), dden(ocell_id_.size());
    for (std::size_t c = 0; c < ocell_id_.size(); ++c) {
      const double w = uc[ocell_id_[c]] / kk;
      if (w == 0.0) {
        dnum[c] = dden[c] = 0.0;
        continue;
      }
      // plain modular: d|w|^p = p |w|^{p-1} sign(w); no 1/p weight to absorb it
      const double tc = vol * ocell_p_[c] * detail::pow_abs(w, ocell_p_[c] - 1.0) * (w > 0.0 ? 1.0 : -1.0);
      dnum[c] = tc * vc[ocell_id_[c]];
      dden[c] = tc * w;
    }
    const double denomk = pairwise_sum(dden);
    if (denomk == 0.0) throw std::domain_error("dk: degenerate modular");
    return pairwise_sum(dnum) / denomk;
  }

  RayleighResult minimize_rayleigh(const RayleighOptions& opts = {}, std::vector<double> seed = {}) const {
    const std::size_t n = unknown_nodes_.size();
    std::vector<double> v = seed.empty() ? default_seed() : std::move(seed);
    if (v.size() != n) throw std::invalid_argument("minimize_rayleigh: seed size mismatch");
    for (auto& x : v) x = std::fabs(x);
    normalize(v);

    RayleighResult res;
    res.status = "max_iter";
    double H = rayleigh(v);
    res.history.push_back(H);
    std::vector<double> G(n), vn(n);
    double tau = 1.0;
    for (int it = 0; it < opts.max_iter; ++it) {
      quotient_gradient(v, G);
      double gsup = 0.0, gsq = 0.0;
      for (double x : G) {
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
      double Hn = H;
      for (int bt = 0; bt < opts.max_backtracks; ++bt) {
        for (std::size_t j = 0; j < n; ++j) vn[j] = v[j] - step * G[j];
        Hn = rayleigh(vn);
        if (Hn <= H - opts.armijo_c * step * gsq) {
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
      v.swap(vn);
      normalize(v);
      H = rayleigh(v);
      res.history.push_back(H);
      res.iterations = it + 1;
      tau = 2.0 * step;
      if (opts.verbose && it % 50 == 0) std::fprintf(stderr, "iter %5d H %.12e grad %.3e\n", it, H, gsup);
      const int w = opts.flat_window;
      if (static_cast<int>(res.history.size()) > w) {
        const double Ho = res.history[res.history.size() - 1 - w];
        if (Ho - H <= opts.flat_rel_tol * H * w) {
          res.status = "flat";
          break;
        }
      }
    }
    const std::vector<double> uc = cell_values(v);
    res.K = luxemburg_norm(pair_modular(uc, true), lux_rel_tol_).norm;
    res.k = luxemburg_norm(lebesgue_modular_omega(uc, false), lux_rel_tol_).norm;
    res.lambda = res.K / res.k;
    res.S = S_of(v);
    res.residual = residual_check(v, res.lambda).rel_residual;
    res.u = lift(v);
    return res;
  }

  // Weak-form defect of (v, lambda): the K-side integral against each hat
  // must balance lambda * S times the k-side integral.
  ResidualReport residual_check(const std::vector<double>& v, double lambda) const {
    const std::size_t n = unknown_nodes_.size();
    const std::vector<double> uc = cell_values(v);
    const double K = luxemburg_norm(pair_modular(uc, true), lux_rel_tol_).norm;
    const double kk = luxemburg_norm(lebesgue_modular_omega(uc, false), lux_rel_tol_).norm;
    std::vector<double> lhs(n), rhs(n);
    double denomK = 0.0, denomk = 0.0;
    numerator_derivative(uc, K, lhs, &denomK);
    denominator_derivative(uc, kk, rhs, &denomk);
    ResidualReport rep;
    rep.lambda = lambda;
    rep.S = denomK / denomk;
    double mr = 0.0, ml = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      ml = std::max(ml, std::fabs(lhs[j]));
      mr = std::max(mr, std::fabs(lhs[j] - lambda * rep.S * rhs[j]));
    }
    rep.max_lhs = ml;
    rep.rel_residual = ml > 0.0 ? mr / ml : mr;
    return rep;
  }

  GridFunction lift(const std::vector<double>& v) const {
    GridFunction u(grid_);
    u.provenance = Provenance::derived_numeric;
    for (std::size_t j = 0; j < v.size(); ++j) u.values[unknown_nodes_[j]] = v[j];
    return u;
  }

  std::vector<double> default_seed() const {
    std::vector<double> v(unknown_nodes_.size());
    long idx[max_dim];
    for (std::size_t j = 0; j < v.size(); ++j) {
      grid_.node_unflatten(unknown_nodes_[j], idx);
      double val = 1.0;
      for (int a = 0; a < grid_.dim(); ++a) {
        const double t = (grid_.node_coord(a, idx[a]) - grid_.box.lo[a]) / grid_.box.extent(a);
        val *= std::sin(M_PI * t);
      }
      v[j] = val;
    }
    return v;
  }

 private:
  // Gradient of H = K/k at v normalized to k(v) = 1.
  void quotient_gradient(const std::vector<double>& v, std::vector<double>& G) const {
    const std::size_t n = unknown_nodes_.size();
    const std::vector<double> uc = cell_values(v);
    const double K = luxemburg_norm(pair_modular(uc, true), lux_rel_tol_).norm;
    const double kk = luxemburg_norm(lebesgue_modular_omega(uc, false), lux_rel_tol_).norm;
    std::vector<double> dKv(n), dkv(n);
    double denomK = 0.0, denomk = 0.0;
    numerator_derivative(uc, K, dKv, &denomK);
    denominator_derivative(uc, kk, dkv, &denomk);
    const double H = K / kk;
    G.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) G[j] = (dKv[j] / denomK - H * dkv[j] / denomk) / kk;
  }

  void normalize(std::vector<double>& v) const {
    const double kk = luxemburg_norm(lebesgue_modular_omega(cell_values(v), false), lux_rel_tol_).norm;
    if (kk == 0.0) throw std::domain_error("RayleighProblem: zero iterate");
    for (auto& x : v) x /= kk;
  }

  void scatter_cells(const std::vector<double>& cg, std::vector<double>& out) const {
    out.assign(unknown_nodes_.size(), 0.0);
    for (std::size_t c = 0; c < cg.size(); ++c) {
      if (cg[c] == 0.0) continue;
      for (int e = cs_start_[c]; e < cs_start_[c + 1]; ++e) out[cs_offs_[e]] += cs_wts_[e] * cg[c];
    }
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
    if (unknown_nodes_.empty()) throw std::invalid_argument("RayleighProblem: grid has no interior nodes");
  }

  void build_cell_stencils() {
    const UniformGrid& eg = pq_.egrid;
    cs_start_.assign(1, 0);
    MultiIndex mi(eg.cells);
    long nn[1 << max_dim];
    double nw[1 << max_dim];
    while (!mi.done) {
      double c[max_dim];
      for (int a = 0; a < eg.dim(); ++a) c[a] = eg.center_coord(a, mi.idx[a]);
      const int cnt = detail::interp_stencil(grid_, c, nn, nw);
      for (int e = 0; e < cnt; ++e) {
        const int uj = node_to_unknown_[nn[e]];
        if (uj < 0) continue;
        cs_offs_.push_back(uj);
        cs_wts_.push_back(nw[e]);
      }
      cs_start_.push_back(static_cast<int>(cs_offs_.size()));
      mi.advance();
    }
  }

  void build_omega_cells(const ExponentField& field) {
    const UniformGrid& eg = pq_.egrid;
    MultiIndex mi(eg.cells);
    for (long flat = 0; !mi.done; ++flat, mi.advance()) {
      double c[max_dim];
      for (int a = 0; a < eg.dim(); ++a) c[a] = eg.center_coord(a, mi.idx[a]);
      if (!grid_.box.contains(c)) continue;
      ocell_id_.push_back(flat);
      ocell_p_.push_back(field.diagonal(c));
    }
  }

  UniformGrid grid_;
  double s_;
  double lux_rel_tol_;
  int threads_;
  PairQuadrature pq_;
  std::vector<long> unknown_nodes_;
  std::vector<int> node_to_unknown_;
  std::vector<int> cs_start_, cs_offs_;
  std::vector<double> cs_wts_;
  std::vector<long> ocell_id_;
  std::vector<double> ocell_p_;
};

}
