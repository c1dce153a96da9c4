// Experiment orchestration behind the command-line tool: flat key-value
// configs (TOML-compatible subset), certificate printing, runs with CSV
// trajectory output and envelope verification, parameter sweeps, and the
// oracle convergence study.
//
// Exit codes: 0 pass, 1 hypothesis failure, 2 envelope violation, 3 config
// error.  All numbers are serialized with 17 significant digits so records
// round-trip and identical configs produce bit-identical files.

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cgle/analysis.hpp"
#include "cgle/certificates.hpp"
#include "cgle/controllers.hpp"
#include "cgle/dynamics.hpp"

namespace cgle {

inline constexpr int kExitOk = 0;
inline constexpr int kExitHypothesisFailure = 1;
inline constexpr int kExitEnvelopeViolation = 2;
inline constexpr int kExitConfigError = 3;

struct ExperimentConfig {
  // domain
  std::string domain = "interval";  // interval | rectangle
  double length = 1.0;
  double length_y = 1.0;
  int grid_points = 64;
  std::string bc = "dirichlet";  // dirichlet | neumann

  CGLEParams params;

  // controller and certificate
  std::string controller = "none";  // none|volume|modal|nodal|steering
  std::string steering_target = "any";  // any | stable
  std::vector<double> nodal_actuation;     // empty = midpoints
  std::vector<double> nodal_observation;   // empty = actuation points
  std::string theorem;                     // empty = derived from controller
  std::optional<double> delta;             // modal_h1 target rate

  // initial data
  std::string ic = "random_smooth";  // single_mode | random_smooth | constant
  int ic_mode = 1;
  unsigned long long ic_seed = 1;
  double ic_decay = 2.0;
  double ic_amplitude = 1.0;
  double ic_value_re = 1.0;
  double ic_value_im = 0.0;
  std::string target_ic = "random_smooth";  // steering target v0
  int target_ic_mode = 1;
  unsigned long long target_ic_seed = 2;
  double target_ic_decay = 2.0;
  double target_ic_amplitude = 1.0;

  // time stepping and verification
  double t_final = 10.0;
  double dt = 0.0;          // 0 = default_dt rule
  double sample_every = 0.01;
  double slack = -1.0;      // < 0 = envelope_slack(dt)
  double window_fraction = 0.5;
  bool force = false;
  std::string out_dir = ".";
};

// Strict parser for `key = value` lines with # comments; unknown keys,
// malformed lines, and bad numbers all throw std::invalid_argument.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);
// Assigns one key (same names as the config file); used by sweeps.
void set_config_value(ExperimentConfig& config, const std::string& key,
                      const std::string& value);

// "1,2,3" or "start:stop:step" (inclusive); empty or malformed throws.
std::vector<double> parse_value_list(const std::string& text);

// %.17g formatting used for every serialized number.
std::string format_double(double x);

DomainPtr make_domain(const ExperimentConfig& config);
ControllerSpec make_controller(const ExperimentConfig& config);
Field make_initial(const ExperimentConfig& config, const DomainPtr& domain);
std::optional<Field> make_target_initial(const ExperimentConfig& config,
                                         const DomainPtr& domain);
// Resolved theorem name ("none" disables certification); validates that the
// requested theorem matches the controller.
std::string resolve_theorem(const ExperimentConfig& config);
std::optional<Certificate> make_certificate(const ExperimentConfig& config,
                                            const DomainPtr& domain);

// Prints the hypothesis table with margins; exit 0 iff all hypotheses hold.
int cmd_certify(const ExperimentConfig& config, std::ostream& out);

// Certifies, simulates, writes <stem>_trajectory.csv and <stem>_record.toml
// under config.out_dir, and verifies the envelope (or the fitted H1 rate for
// modal_h1).  --force maps to config.force.
int cmd_run(const ExperimentConfig& config, const std::string& stem,
            std::ostream& out);

struct SweepRow {
  double value = 0.0;
  bool satisfied = false;
  std::optional<double> exponent;
  std::optional<double> fitted_rate;
  std::string error;  // nonempty if this point failed structurally
};

// Re-certifies and (when satisfied) re-runs for each parameter value, fanning
// runs across worker threads; rows come back in input order and are written
// to <stem>_sweep.csv.  Exit 0 unless every point is a structural error.
int cmd_sweep(const ExperimentConfig& config, const std::string& param,
              const std::vector<double>& values, const std::string& stem,
              std::ostream& out, std::vector<SweepRow>* rows_out = nullptr);

struct ConvergeRow {
  double dt = 0.0;
  double error = 0.0;            // relative L2 error vs the oracle at t = 1
  std::optional<double> order;   // observed order vs the previous dt
};

// Integrator order study against linear_modal_exact; requires kappa = 0 and
// a controller the closed form covers (none or modal).  The controller is
// forced through the Heun stages so the second-order error is visible.
int cmd_converge(const ExperimentConfig& config,
                 const std::vector<double>& dts, std::ostream& out,
                 std::vector<ConvergeRow>* rows_out = nullptr);

}  // namespace cgle
