#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "uhf/harness.hpp"

namespace {

using namespace uhf;
using namespace uhf::harness;

int exit_code(ExitCode c) { return static_cast<int>(c); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uhfflow: quantum-spin-lattice flow experiments"};
  app.require_subcommand(1);
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 0;
  if (const char* env = std::getenv("UHFFLOW_OUT")) out = env;
  if (out.empty()) out = "uhfflow-out";

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    auto* c = cmd->add_option("--config", config, "experiment config file");
    if (needs_config) c->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", out, "output directory (default $UHFFLOW_OUT or ./uhfflow-out)");
    cmd->add_option_function<std::uint64_t>(
        "--seed", [&](const std::uint64_t& s) { seed = s, seed_set = true; }, "override the rng seed");
    cmd->add_option("--jobs", jobs, "OpenMP threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
  };
  for (const char* name : {"evolve", "ergodicity", "flow", "lemma"}) add_common(app.add_subcommand(name), true);
  add_common(app.add_subcommand("selftest", "run the 13 acceptance criteria"), false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_code(ExitCode::config_error);
  }
  kernels::set_jobs(jobs);

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    RunReport report;
    if (cmd == "selftest") {
      report = cmd_selftest(seed_set ? seed : 20261016, out);
      for (const auto& v : report.verdicts) {
        std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << v.name << " = " << v.measured << '\n';
      }
    } else {
      auto cfg = load_config(config);
      if (seed_set) cfg.seed = seed;
      if (cmd == "evolve") report = cmd_evolve(cfg, out);
      if (cmd == "ergodicity") report = cmd_ergodicity(cfg, out);
      if (cmd == "flow") report = cmd_flow(cfg, out);
      if (cmd == "lemma") report = cmd_lemma(cfg, out);
      for (const auto& v : report.verdicts) {
        std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << v.name << " = " << v.measured << " (threshold "
                  << v.threshold << ")\n";
      }
    }
    std::cout << "report: " << out << "/report.json (" << report.wall_time << " s)\n";
    return exit_code(report.all_pass() ? ExitCode::pass : ExitCode::verdict_fail);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_code(ExitCode::config_error);
  } catch (const std::exception& e) {
    std::cerr << "engine error: " << e.what() << '\n';
    return exit_code(ExitCode::engine_error);
  }
}
