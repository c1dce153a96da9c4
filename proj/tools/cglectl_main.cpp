// cglectl: certify / run / sweep / converge front end for the CGLE
// control library.  Exit codes: 0 success, 1 hypothesis failure,
// 2 envelope violation or divergence, 3 configuration error.
#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "cgle/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Finite-parameter feedback control experiments for the "
               "complex Ginzburg-Landau equation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string param_name;
  std::string values_text;
  std::string dts_text;
  bool force = false;
  double slack = -1.0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config file")
        ->required();
    sub->add_option("--out", out_dir, "output directory override");
  };

  CLI::App* certify = app.add_subcommand(
      "certify", "evaluate theorem hypotheses and print margins");
  add_common(certify);

  CLI::App* run = app.add_subcommand(
      "run", "simulate and verify the certified decay envelope");
  add_common(run);
  run->add_flag("--force", force, "run even if hypotheses fail");
  run->add_option("--slack", slack,
                  "relative envelope slack (default: 1e-6 + 10*dt^2)");

  CLI::App* sweep = app.add_subcommand(
      "sweep", "re-certify and re-run across a parameter range");
  add_common(sweep);
  sweep->add_option("--param", param_name, "config key to vary")->required();
  sweep->add_option("--values", values_text,
                    "comma list or start:stop:step range")
      ->required();

  CLI::App* converge = app.add_subcommand(
      "converge", "temporal self-convergence against the linear oracle");
  add_common(converge);
  converge->add_option("--dts", dts_text, "comma list of time steps")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cgle::kExitConfigError;
  }

  try {
    cgle::ExperimentConfig config = cgle::parse_config_file(config_path);
    if (!out_dir.empty()) config.out_dir = out_dir;
    if (force) config.force = true;
    if (slack >= 0.0) config.slack = slack;
    const std::string stem =
        std::filesystem::path(config_path).stem().string();

    if (*certify) return cgle::cmd_certify(config, std::cout);
    if (*run) return cgle::cmd_run(config, stem, std::cout);
    if (*sweep)
      return cgle::cmd_sweep(config, param_name,
                             cgle::parse_value_list(values_text), stem,
                             std::cout);
    if (*converge)
      return cgle::cmd_converge(config, cgle::parse_value_list(dts_text),
                                std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cgle::kExitConfigError;
  }
  return cgle::kExitConfigError;
}
