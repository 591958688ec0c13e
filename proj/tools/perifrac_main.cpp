#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include <perifrac/runner.hpp>
#include <perifrac/version.hpp>

int main(int argc, char** argv) {
  CLI::App app{"Nonlocal anisotropic energies: seminorms, limit sweeps, Dirichlet and eigenvalue solvers"};
  app.set_version_flag("--version", std::string(perifrac::version_string));

  std::string command;
  app.add_option("command", command, "norms | seminorm | bbm | gamma | solve | eigen | check")->required();
  std::string config_path;
  app.add_option("--config", config_path, "configuration file (INI)")->required();
  std::string out_dir = "out";
  app.add_option("--out", out_dir, "output directory (created if absent)");
  int threads = 1;
  app.add_option("--threads", threads, "worker threads; results are independent of this")->check(CLI::Range(1, 64));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  perifrac::Config cfg = perifrac::Config::parse_file(config_path);
  if (!cfg.ok()) {
    for (const auto& msg : cfg.errors()) std::fprintf(stderr, "config: %s\n", msg.c_str());
    return 2;
  }
  return perifrac::run_command(command, cfg, out_dir, threads);
}
