// Command-line front end. Talks to the simulation core exclusively through
// the C API in adiasim.h (the shared library boundary).
#include <cstdio>
#include <string>

#include "CLI11.hpp"

#include "adiasim.h"

namespace {

struct CommonOpts {
  std::string config;
  std::string out = "out";
  int jobs = 1;
  unsigned long long seed = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config, "scenario configuration file (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", opts.out, "output directory for CSV/JSON artifacts");
  cmd->add_option("--jobs", opts.jobs, "concurrent eps-runs for sweeps")->check(CLI::Range(1, 256));
  cmd->add_option("--seed", opts.seed, "seed for randomized piston initialization");
}

int run(const char* command, const CommonOpts& opts) {
  adia_scenario* scenario = nullptr;
  adia_status st = adia_scenario_load_file(opts.config.c_str(), &scenario);
  if (st != ADIA_OK) {
    std::fprintf(stderr, "error (%s): %s\n", adia_status_name(st), adia_last_error());
    return static_cast<int>(st);
  }

  adia_report* report = nullptr;
  st = adia_run(scenario, command, opts.out.c_str(), opts.jobs, opts.seed, &report);
  adia_scenario_free(scenario);
  if (st != ADIA_OK) {
    std::fprintf(stderr, "error (%s): %s\n", adia_status_name(st), adia_last_error());
    return static_cast<int>(st);
  }

  std::printf("%s\n", adia_report_summary(report));
  adia_report_free(report);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"adiasim - event-driven impact-system simulators with adiabatic diagnostics"};
  app.require_subcommand(1);

  CommonOpts simulate_opts, sweep_opts, compare_opts, classify_opts;
  CLI::App* simulate = app.add_subcommand("simulate", "run one exact simulation, emit series");
  add_common(simulate, simulate_opts);
  CLI::App* sweep = app.add_subcommand("sweep", "eps-sweep with slope fits");
  add_common(sweep, sweep_opts);
  CLI::App* compare =
      app.add_subcommand("compare-effective", "exact vs averaged-dynamics comparison");
  add_common(compare, compare_opts);
  CLI::App* classify = app.add_subcommand("classify", "waveguide longitudinal regime");
  add_common(classify, classify_opts);

  CLI11_PARSE(app, argc, argv);

  if (simulate->parsed()) return run("simulate", simulate_opts);
  if (sweep->parsed()) return run("sweep", sweep_opts);
  if (compare->parsed()) return run("compare-effective", compare_opts);
  return run("classify", classify_opts);
}
