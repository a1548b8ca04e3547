#include <iostream>

#include <CLI11.hpp>

#include "cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"repvis: reputation-visibility model laboratory"};
  app.require_subcommand(1);

  repvis::cli::CommonOptions common;
  app.add_option("--set", common.overrides, "Override a config key (section.key=value)")
      ->take_all();
  app.add_option("--threads", common.threads, "Worker cap (0 = available parallelism)");
  app.add_option("--out-dir", common.out_dir,
                 "Base directory for relative outputs (REPVIS_OUT_DIR)");

  std::string config_path, panel_path, out_path, grid_spec = "0.01:0.99:0.01";
  std::string selector = "all";
  double pi = 0.5;
  std::uint64_t seed = 1;

  auto* calc = app.add_subcommand("calc", "Sign-test report at one belief (JSON)");
  calc->add_option("--config", config_path, "Scenario config")->required();
  calc->add_option("--pi", pi, "Belief in (0,1)")->required();

  auto* sweep = app.add_subcommand("sweep", "Sign-test sweep over a belief grid (CSV)");
  sweep->add_option("--config", config_path, "Scenario config")->required();
  sweep->add_option("--grid", grid_spec, "start:stop:step");
  sweep->add_option("--out", out_path, "Output CSV path")->required();

  auto* verify = app.add_subcommand("verify", "Run registered claim checkers");
  verify->add_option("claim", selector, "Claim id or 'all'");
  verify->add_option("--seed", seed, "Seed for randomized claims");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo career panel (CSV)");
  simulate->add_option("--config", config_path, "Scenario + simulation config")->required();
  simulate->add_option("--out", out_path, "Panel CSV path")->required();

  auto* estimate = app.add_subcommand("estimate", "Event studies, first stage and 2SLS");
  estimate->add_option("--panel", panel_path, "Panel CSV")->required();
  estimate->add_option("--config", config_path, "Estimation config (optional)");
  estimate->add_option("--out", out_path, "Output directory")->required();

  auto* report = app.add_subcommand("report", "Bundle sweep + verification outputs");
  report->add_option("--config", config_path, "Scenario config")->required();
  report->add_option("--out", out_path, "Output directory")->required();
  report->add_option("--seed", seed, "Seed for randomized claims");

  CLI11_PARSE(app, argc, argv);

  if (calc->parsed())
    return repvis::cli::cmd_calc(config_path, pi, common, std::cout, std::cerr);
  if (sweep->parsed())
    return repvis::cli::cmd_sweep(config_path, grid_spec, out_path, common, std::cout,
                                  std::cerr);
  if (verify->parsed())
    return repvis::cli::cmd_verify(selector, seed, common, std::cout, std::cerr);
  if (simulate->parsed())
    return repvis::cli::cmd_simulate(config_path, out_path, common, std::cout, std::cerr);
  if (estimate->parsed())
    return repvis::cli::cmd_estimate(panel_path, config_path, out_path, common, std::cout,
                                     std::cerr);
  if (report->parsed())
    return repvis::cli::cmd_report(config_path, out_path, seed, common, std::cout,
                                   std::cerr);
  return repvis::cli::kInputError;
}
