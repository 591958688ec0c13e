#pragma once

#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "bbm.hpp"
#include "config.hpp"
#include "dirichlet.hpp"
#include "io.hpp"
#include "modular.hpp"
#include "rayleigh.hpp"
#include "test_functions.hpp"

// Command layer behind the CLI. Each command reads its sections from the
// configuration, runs the computation, writes artifacts under the output
// directory, and prints a deterministic one-line-per-result digest.
// Exit codes: 0 success, 1 runtime failure, 2 configuration error,
// 3 numerical check failure.

namespace perifrac {

namespace runner_detail {

inline UniformGrid build_grid(Config& cfg) {
  const std::vector<double> lo = cfg.require_double_list("grid", "lo");
  const std::vector<double> hi = cfg.require_double_list("grid", "hi");
  const std::vector<long> cells = cfg.get_long_list("grid", "cells");
  if (lo.empty() || hi.empty() || cells.empty()) return UniformGrid(Box({0.0}, {1.0}), {8});
  try {
    return UniformGrid(Box(lo, hi), cells);
  } catch (const std::exception& e) {
    cfg.record_error(std::string("[grid] ") + e.what());
    return UniformGrid(Box({0.0}, {1.0}), {8});
  }
}

inline std::shared_ptr<const TestFunction> build_function(Config& cfg, int dim) {
  const std::string kind = cfg.get_string("function", "kind", "gaussian");
  TestFunctionKind k = TestFunctionKind::gaussian;
  if (kind == "gaussian")
    k = TestFunctionKind::gaussian;
  else if (kind == "bump")
    k = TestFunctionKind::bump;
  else if (kind == "polynomial_bump")
    k = TestFunctionKind::polynomial_bump;
  else if (kind == "indicator")
    k = TestFunctionKind::indicator;
  else
    cfg.record_error("[function] unknown kind '" + kind + "'");
  const double amp = cfg.get_double("function", "amplitude", 1.0);
  std::vector<double> center = cfg.get_double_list("function", "center", std::vector<double>(dim, 0.0));
  std::vector<double> width = cfg.get_double_list("function", "width", std::vector<double>(dim, 1.0));
  const long power = cfg.get_long("function", "power", 3);
  if (static_cast<int>(center.size()) == 1 && dim > 1) center.assign(dim, center[0]);
  if (static_cast<int>(width.size()) == 1 && dim > 1) width.assign(dim, width[0]);
  try {
    return std::make_shared<TestFunction>(k, dim, amp, center, width, static_cast<int>(power));
  } catch (const std::exception& e) {
    cfg.record_error(std::string("[function] ") + e.what());
    return std::make_shared<TestFunction>(TestFunctionKind::gaussian, dim, 1.0, std::vector<double>(dim, 0.0),
                                          std::vector<double>(dim, 1.0), 3);
  }
}

inline ExponentField build_field(Config& cfg, int dim, const Box& probe) {
  const std::string kind = cfg.get_string("exponents", "kind", "constant");
  try {
    if (kind == "constant") return ExponentField::constant(dim, cfg.get_double("exponents", "value", 2.0), probe);
    if (kind == "separable") {
      std::vector<double> dir = cfg.get_double_list("exponents", "direction", std::vector<double>(dim, 1.0));
      if (static_cast<int>(dir.size()) == 1 && dim > 1) dir.assign(dim, dir[0]);
      return ExponentField::separable(dim, cfg.get_double("exponents", "base", 2.0),
                                      cfg.get_double("exponents", "amplitude", 0.2), dir,
                                      cfg.get_double("exponents", "offset", 0.0), probe);
    }
    if (kind == "radial")
      return ExponentField::radial(dim, cfg.get_double("exponents", "base", 2.0),
                                   cfg.get_double("exponents", "amplitude", 0.2),
                                   cfg.get_double("exponents", "width", 1.0), probe);
    cfg.record_error("[exponents] unknown kind '" + kind + "'");
  } catch (const std::exception& e) {
    cfg.record_error(std::string("[exponents] ") + e.what());
  }
  return ExponentField::constant(dim, 2.0, probe);
}

inline AnisotropyParams build_params(Config& cfg, int dim) {
  std::vector<double> s = cfg.get_double_list("params", "s", std::vector<double>(dim, 0.5));
  std::vector<double> p = cfg.get_double_list("params", "p", std::vector<double>(dim, 2.0));
  std::vector<double> delta = cfg.get_double_list("params", "delta", std::vector<double>(dim, 0.0));
  if (static_cast<int>(s.size()) == 1 && dim > 1) s.assign(dim, s[0]);
  if (static_cast<int>(p.size()) == 1 && dim > 1) p.assign(dim, p[0]);
  if (static_cast<int>(delta.size()) == 1 && dim > 1) delta.assign(dim, delta[0]);
  try {
    return AnisotropyParams(s, p, delta);
  } catch (const std::exception& e) {
    cfg.record_error(std::string("[params] ") + e.what());
    return AnisotropyParams(std::vector<double>(dim, 0.5), std::vector<double>(dim, 2.0),
                            std::vector<double>(dim, 0.0));
  }
}

inline SingularQuadSpec build_quad(Config& cfg, int threads) {
  SingularQuadSpec spec;
  spec.levels = static_cast<int>(cfg.get_long("quadrature", "levels", 16));
  spec.points_per_level = static_cast<int>(cfg.get_long("quadrature", "points", 6));
  spec.outer_margin = cfg.get_double("quadrature", "margin", 1.0);
  spec.threads = threads;
  return spec;
}

inline SolveOptions build_solve_options(Config& cfg) {
  SolveOptions o;
  o.max_iter = static_cast<int>(cfg.get_long("solve", "max_iter", o.max_iter));
  o.grad_tol = cfg.get_double("solve", "grad_tol", o.grad_tol);
  o.energy_rel_tol = cfg.get_double("solve", "energy_rel_tol", o.energy_rel_tol);
  return o;
}

inline std::string outfile(const std::string& out_dir, const std::string& name) {
  return (std::filesystem::path(out_dir) / name).string();
}

inline void print_kv(const char* key, double v) { std::printf("%s = %.12g\n", key, v); }

}  // namespace runner_detail

inline int run_norms(Config& cfg, const std::string& out_dir, int threads, const std::string& digest) {
  using namespace runner_detail;
  const UniformGrid grid = build_grid(cfg);
  const auto f = build_function(cfg, grid.dim());
  const ExponentField field = build_field(cfg, grid.dim(), grid.box);
  std::vector<double> ps = cfg.get_double_list("norms", "p", {2.0});
  cfg.finalize();
  if (!cfg.ok()) return 2;
  const GridFunction u = sample(f, grid);
  nlohmann::ordered_json j = summary_base("norms", digest);
  j["function"] = to_string(f->kind);
  for (double p : ps) {
    const QuadValue v = lp_modular(u, p, threads);
    char key[32];
    std::snprintf(key, sizeof key, "lp_modular_p%g", p);
    j[key] = v.value;
    std::printf("lp_modular p=%g value = %.12g error_estimate = %.3g\n", p, v.value, v.error);
  }
  const ScalarExponentField diag{field};
  const ModularSamples m = lebesgue_modular(u, diag, true, threads);
  const LuxemburgResult lux = luxemburg_norm(m);
  j["luxemburg_weighted"] = lux.norm;
  j["luxemburg_converged"] = lux.converged;
  std::printf("luxemburg weighted norm = %.12g iterations = %d\n", lux.norm, lux.iterations);
  write_json(j, outfile(out_dir, "summary.json"));
  return 0;
}

inline int run_seminorm(Config& cfg, const std::string& out_dir, int threads, const std::string& digest) {
  using namespace runner_detail;
  const UniformGrid grid = build_grid(cfg);
  const auto f = build_function(cfg, grid.dim());
  const SingularQuadSpec spec = build_quad(cfg, threads);
  const std::string mode = cfg.get_string("seminorm", "mode", "peridynamic");
  const int axis = static_cast<int>(cfg.get_long("seminorm", "axis", 0));
  nlohmann::ordered_json j = summary_base("seminorm", digest);
  j["mode"] = mode;
  if (mode == "peridynamic") {
    const AnisotropyParams par = build_params(cfg, grid.dim());
    cfg.finalize();
    if (!cfg.ok()) return 2;
    const GridFunction u = sample(f, grid);
    const EnergyReport rep = peridynamic_seminorm(u, axis, par.s[axis], par.p[axis], par.delta[axis], spec);
    j["value"] = rep.value;
    j["error_estimate"] = rep.error_estimate;
    j["interp_order"] = rep.interp_order;
    std::printf("peridynamic axis=%d value = %.12g error_estimate = %.3g\n", axis, rep.value, rep.error_estimate);
  } else if (mode == "varexp") {
    const double s = cfg.get_double("seminorm", "s", 0.5);
    const ExponentField field = build_field(cfg, grid.dim(), grid.box);
    cfg.finalize();
    if (!cfg.ok()) return 2;
    const GridFunction u = sample(f, grid);
    const DirectionalSeminorm ds = directional_seminorm_varexp(u, axis, s, field, spec);
    j["modular"] = ds.modular.report.value;
    j["norm"] = ds.norm.norm;
    j["error_estimate"] = ds.modular.report.error_estimate;
    std::printf("varexp axis=%d modular = %.12g norm = %.12g\n", axis, ds.modular.report.value, ds.norm.norm);
  } else if (mode == "gagliardo") {
    const double s = cfg.get_double("seminorm", "s", 0.5);
    const bool weighted = cfg.get_bool("seminorm", "weighted", true);
    const ExponentField field = build_field(cfg, grid.dim(), grid.box);
    cfg.finalize();
    if (!cfg.ok()) return 2;
    const GridFunction u = sample(f, grid);
    const GagliardoResult gr = gagliardo_modular(u, s, field, weighted, spec.outer_margin, spec);
    const LuxemburgResult lux = luxemburg_norm(gr.samples);
    j["modular"] = gr.report.value;
    j["norm"] = lux.norm;
    j["error_estimate"] = gr.report.error_estimate;
    std::printf("gagliardo modular = %.12g norm = %.12g\n", gr.report.value, lux.norm);
  } else {
    cfg.record_error("[seminorm] unknown mode '" + mode + "'");
    cfg.finalize();
    return 2;
  }
  write_json(j, outfile(out_dir, "summary.json"));
  return 0;
}

inline int run_bbm(Config& cfg, const std::string& out_dir, int threads, const std::string& digest) {
  using namespace runner_detail;
  const UniformGrid grid = build_grid(cfg);
  const auto f = build_function(cfg, grid.dim());
  const SingularQuadSpec spec = build_quad(cfg, threads);
  const std::string mode = cfg.get_string("bbm", "mode", "delta");
  const int axis = static_cast<int>(cfg.get_long("bbm", "axis", 0));
  SweepResult sw;
  nlohmann::ordered_json j = summary_base("bbm", digest);
  if (mode == "delta") {
    const double s = cfg.get_double("bbm", "s", 0.5);
    const double p = cfg.get_double("bbm", "p", 2.0);
    const std::vector<double> deltas = cfg.get_double_list("bbm", "deltas", {0.2, 0.1, 0.05, 0.025});
    cfg.finalize();
    if (!cfg.ok()) return 2;
    sw = bbm_delta_sweep(f, grid, axis, s, p, deltas, spec);
    j["s"] = s;
    j["p"] = p;
  } else if (mode == "s") {
    const ExponentField field = build_field(cfg, grid.dim(), grid.box);
    const std::vector<double> s_list = cfg.get_double_list("bbm", "s_list", {0.9, 0.95, 0.99});
    cfg.finalize();
    if (!cfg.ok()) return 2;
    sw = bbm_s_sweep_varexp(f, grid, axis, field, s_list, spec);
  } else {
    cfg.record_error("[bbm] unknown mode '" + mode + "'");
    cfg.finalize();
    return 2;
  }
  j["mode"] = mode;
  j["target"] = sw.target;
  j["extrapolated"] = sw.extrapolated;
  j["extrap_rel_err"] = sw.extrap_rel_err;
  j["final_rel_err"] = sw.final_rel_err;
  j["monotone"] = sw.monotone;
  write_json(j, outfile(out_dir, "summary.json"));
  std::ofstream csv(outfile(out_dir, "sweep.csv"), std::ios::binary);
  csv << "# " << version_string << " config=" << digest << "\n";
  csv << "param,ratio,abs_err,rel_err\n";
  for (std::size_t i = 0; i < sw.params.size(); ++i)
    csv << format_g17(sw.params[i]) << "," << format_g17(sw.ratios[i]) << "," << format_g17(sw.abs_err[i]) << ","
        << format_g17(sw.rel_err[i]) << "\n";
  for (std::size_t i = 0; i < sw.params.size(); ++i)
    std::printf("param = %.6g ratio = %.12g rel_err = %.3e\n", sw.params[i], sw.ratios[i], sw.rel_err[i]);
  print_kv("target", sw.target);
  print_kv("extrapolated", sw.extrapolated);
  std::printf("extrap_rel_err = %.3e monotone = %s\n", sw.extrap_rel_err, sw.monotone ? "yes" : "no");
  return 0;
}

inline int run_gamma(Config& cfg, const std::string& out_dir, int threads, const std::string& digest) {
  using namespace runner_detail;
  const UniformGrid grid = build_grid(cfg);
  const auto f = build_function(cfg, grid.dim());
  const SingularQuadSpec spec = build_quad(cfg, threads);
  const AnisotropyParams par = build_params(cfg, grid.dim());
  std::vector<double> dstart = cfg.get_double_list("gamma", "delta_start", std::vector<double>(grid.dim(), 0.5));
  std::vector<double> dlimit = cfg.get_double_list("gamma", "delta_limit", std::vector<double>(grid.dim(), 0.0));
  const long steps = cfg.get_long("gamma", "steps", 4);
  if (static_cast<int>(dstart.size()) == 1 && grid.dim() > 1) dstart.assign(grid.dim(), dstart[0]);
  if (static_cast<int>(dlimit.size()) == 1 && grid.dim() > 1) dlimit.assign(grid.dim(), dlimit[0]);
  cfg.finalize();
  if (!cfg.ok()) return 2;
  std::vector<std::vector<double>> path;
  for (long k = 0; k < steps; ++k) {
    std::vector<double> row(grid.dim());
    for (int a = 0; a < grid.dim(); ++a)
      row[a] = dlimit[a] > 0.0 ? dlimit[a] : dstart[a] * std::pow(2.0, -static_cast<double>(k));
    path.push_back(row);
  }
  const GammaPathReport rep = gamma_energy_convergence(f, grid, par, path, dlimit, spec);
  nlohmann::ordered_json j = summary_base("gamma", digest);
  j["targets"] = rep.targets;
  j["final_rel_err"] = rep.final_rel_err;
  j["pass"] = rep.pass;
  write_json(j, outfile(out_dir, "summary.json"));
  std::ofstream csv(outfile(out_dir, "path.csv"), std::ios::binary);
  csv << "# " << version_string << " config=" << digest << "\n";
  csv << "step,axis,delta,value,target\n";
  for (std::size_t k = 0; k < rep.values.size(); ++k)
    for (int a = 0; a < grid.dim(); ++a)
      csv << k << "," << a << "," << format_g17(rep.deltas[k][a]) << "," << format_g17(rep.values[k][a]) << ","
          << format_g17(rep.targets[a]) << "\n";
  for (int a = 0; a < grid.dim(); ++a)
    std::printf("axis %d target = %.12g final_rel_err = %.3e %s\n", a, rep.targets[a], rep.final_rel_err[a],
                rep.fixed_axis[a] ? "(fixed)" : "");
  std::printf("gamma_path pass = %s\n", rep.pass ? "yes" : "no");
  return rep.pass ? 0 : 3;
}

inline int run_solve(Config& cfg, const std::string& out_dir, int threads, const std::string& digest) {
  using namespace runner_detail;
  const UniformGrid grid = build_grid(cfg);
  const auto f = build_function(cfg, grid.dim());
  const SingularQuadSpec spec = build_quad(cfg, threads);
  const AnisotropyParams par = build_params(cfg, grid.dim());
  const SolveOptions opts = build_solve_options(cfg);
  cfg.finalize();
  if (!cfg.ok()) return 2;
  const GridFunction load = sample(f, grid);
  DirichletProblem prob(grid, par, load, spec);
  const SolveResult sol = prob.solve(opts, threads);
  nlohmann::ordered_json j = summary_base("solve", digest);
  j["unknowns"] = prob.unknown_count();
  j["energy"] = sol.energy;
  j["weak_residual"] = sol.weak_residual;
  j["iterations"] = sol.iterations;
  j["status"] = sol.status;
  j["direction_energy"] = sol.direction_energy;
  write_json(j, outfile(out_dir, "summary.json"));
  write_grid_function_csv(sol.u, outfile(out_dir, "solution.csv"), digest);
  print_kv("energy", sol.energy);
  print_kv("weak_residual", sol.weak_residual);
  std::printf("iterations = %d status = %s\n", sol.iterations, sol.status.c_str());
  return sol.status == "line_search_stall" ? 1 : 0;
}

inline int run_eigen(Config& cfg, const std::string& out_dir, int threads, const std::string& digest) {
  using namespace runner_detail;
  const UniformGrid grid = build_grid(cfg);
  const double s = cfg.get_double("eigen", "s", 0.5);
  const double margin = cfg.get_double("eigen", "margin", 1.0);
  const ExponentField field = build_field(cfg, grid.dim(), grid.box);
  RayleighOptions opts;
  opts.max_iter = static_cast<int>(cfg.get_long("eigen", "max_iter", opts.max_iter));
  opts.grad_tol = cfg.get_double("eigen", "grad_tol", opts.grad_tol);
  cfg.finalize();
  if (!cfg.ok()) return 2;
  RayleighProblem prob(grid, s, field, margin, opts.lux_rel_tol, threads);
  const RayleighResult res = prob.minimize_rayleigh(opts);
  nlohmann::ordered_json j = summary_base("eigen", digest);
  j["lambda"] = res.lambda;
  j["K"] = res.K;
  j["k"] = res.k;
  j["S"] = res.S;
  j["residual"] = res.residual;
  j["iterations"] = res.iterations;
  j["index"] = res.index;
  j["status"] = res.status;
  write_json(j, outfile(out_dir, "summary.json"));
  write_grid_function_csv(res.u, outfile(out_dir, "eigenfunction.csv"), digest);
  print_kv("lambda", res.lambda);
  print_kv("residual", res.residual);
  std::printf("iterations = %d status = %s\n", res.iterations, res.status.c_str());
  return res.status == "line_search_stall" ? 1 : 0;
}

inline int run_check(Config& cfg, const std::string& out_dir, int threads, const std::string& digest) {
  using namespace runner_detail;
  const UniformGrid grid = build_grid(cfg);
  const auto f = build_function(cfg, grid.dim());
  const ExponentField field = build_field(cfg, grid.dim(), grid.box);
  const AnisotropyParams par = build_params(cfg, grid.dim());
  const double s_check = cfg.get_double("check", "s", par.s[0]);
  cfg.finalize();
  if (!cfg.ok()) return 2;
  bool all_ok = true;
  const ExponentFieldReport fr = validate_exponents(field, s_check, grid.dim());
  std::printf("exponent_field symmetric=%s range=[%.6g,%.6g] admissible=%s\n", fr.symmetric ? "yes" : "no",
              fr.probe_min, fr.probe_max, fr.pass() ? "yes" : "no");
  all_ok = all_ok && fr.pass();
  nlohmann::ordered_json j = summary_base("check", digest);
  j["field_admissible"] = fr.pass();
  try {
    const CriticalExponents ce = critical_exponent(par, grid.dim());
    std::printf("critical sbar = %.12g sbar_pbar = %.12g pstar = %.12g\n", ce.sbar, ce.spbar, ce.pstar);
    j["sbar"] = ce.sbar;
    j["spbar"] = ce.spbar;
    j["pstar"] = ce.pstar;
  } catch (const std::exception& e) {
    std::printf("critical exponent undefined: %s\n", e.what());
    j["pstar"] = nullptr;
  }
  const GridFunction u = sample(f, grid);
  const ScalarExponentField diag{field};
  const ModularSamples m = lebesgue_modular(u, diag, true, threads);
  const NormModularReport nm = norm_modular_relations(m);
  std::printf("norm_modular regime=%s sign=%s lower=%s upper=%s unit=%s\n", nm.regime.c_str(),
              nm.sign_ok ? "ok" : "FAIL", nm.lower_ok ? "ok" : "FAIL", nm.upper_ok ? "ok" : "FAIL",
              nm.unit_ok ? "ok" : "FAIL");
  all_ok = all_ok && nm.sign_ok && nm.lower_ok && nm.upper_ok && nm.unit_ok;
  j["norm_modular_ok"] = nm.sign_ok && nm.lower_ok && nm.upper_ok && nm.unit_ok;
  j["pass"] = all_ok;
  write_json(j, outfile(out_dir, "summary.json"));
  std::printf("check %s\n", all_ok ? "PASS" : "FAIL");
  return all_ok ? 0 : 3;
}

inline int run_command(const std::string& command, Config& cfg, const std::string& out_dir, int threads) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    std::fprintf(stderr, "cannot create output directory %s: %s\n", out_dir.c_str(), ec.message().c_str());
    return 1;
  }
  const std::string digest = digest_string(cfg.raw_text());
  int rc = 2;
  try {
    if (command == "norms")
      rc = run_norms(cfg, out_dir, threads, digest);
    else if (command == "seminorm")
      rc = run_seminorm(cfg, out_dir, threads, digest);
    else if (command == "bbm")
      rc = run_bbm(cfg, out_dir, threads, digest);
    else if (command == "gamma")
      rc = run_gamma(cfg, out_dir, threads, digest);
    else if (command == "solve")
      rc = run_solve(cfg, out_dir, threads, digest);
    else if (command == "eigen")
      rc = run_eigen(cfg, out_dir, threads, digest);
    else if (command == "check")
      rc = run_check(cfg, out_dir, threads, digest);
    else {
      std::fprintf(stderr, "unknown command '%s'\n", command.c_str());
      return 2;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  if (!cfg.ok()) {
    for (const auto& msg : cfg.errors()) std::fprintf(stderr, "config: %s\n", msg.c_str());
    return 2;
  }
  return rc;
}

}
