// Acceptance harness: checks the numbered end-to-end criteria and prints one
// PASS/FAIL line per item.  argv[1] must point at the cglectl binary for the
// subprocess checks.  Exits nonzero if any criterion fails.

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "cgle/experiment.hpp"

using namespace cgle;

namespace {

constexpr double kPi = std::numbers::pi;

int g_failures = 0;

void check(int index, bool pass, const std::string& detail) {
  if (pass) {
    std::printf("A%d PASS\n", index);
  } else {
    ++g_failures;
    std::printf("A%d FAIL (%s)\n", index, detail.c_str());
  }
  std::fflush(stdout);
}

void run_criterion(int index, const std::function<void(int)>& body) {
  try {
    body(index);
  } catch (const std::exception& e) {
    check(index, false, std::string("exception: ") + e.what());
  }
}

DomainPtr make_interval(double length, int m, BoundaryCondition bc) {
  DomainSpec spec;
  spec.kind = DomainKind::Interval;
  spec.lengths = {length, 1.0};
  spec.grid_points = m;
  spec.bc = bc;
  return build_domain(spec);
}

double weighted_l2_sq(const Field& f) {
  const auto& w = f.domain()->quadrature_weights();
  double acc = 0.0;
  for (int i = 0; i < f.size(); ++i) acc += w[i] * std::norm(f.values()[i]);
  return acc;
}

struct CliResult {
  int exit_code = -1;
  std::string output;
};

CliResult run_cli(const std::string& command) {
  FILE* pipe = popen((command + " 2>&1").c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed for: " + command);
  CliResult result;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) result.output.append(buf, n);
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::filesystem::path g_out_dir;

std::string write_config(const std::string& name, const std::string& body) {
  const auto path = g_out_dir / name;
  std::ofstream out(path, std::ios::binary);
  out << body;
  return path.string();
}

int count_occurrences(const std::string& text, const std::string& needle) {
  int count = 0;
  for (size_t pos = text.find(needle); pos != std::string::npos;
       pos = text.find(needle, pos + needle.size()))
    ++count;
  return count;
}

// ---------------------------------------------------------------- criteria

// Exactness on the diagonal flow: controlled linear run vs the closed form.
void a1(int index) {
  auto dom = make_interval(kPi, 64, BoundaryCondition::Dirichlet);
  CGLEParams params;
  params.lambda = 1.0;
  params.alpha = 2.0;
  params.gamma = 0.5;
  params.mu = 1.0;
  params.n_controllers = 1;
  ControllerSpec modal;
  modal.kind = ControllerKind::Modal;
  Field u0 = initial_single_mode(dom, 1);
  SimulateOptions opts;
  opts.t_final = 1.0;
  opts.dt = 1e-3;
  opts.sample_every = 0.25;
  TrajectoryRecord rec = simulate(u0, params, modal, opts);
  Field exact = from_modal(
      linear_modal_exact(to_modal(u0, dom->max_modes()), params, 1.0));
  Field diff(dom, rec.final_state.values() - exact.values());
  const double rel =
      std::sqrt(weighted_l2_sq(diff) / weighted_l2_sq(exact));
  check(index, rel <= 1e-8, "relative error " + format_double(rel));
}

// Volume-element control on a Neumann interval obeys its decay envelope.
void a2(int index) {
  auto dom = make_interval(1.0, 65, BoundaryCondition::Neumann);
  CGLEParams params;
  params.lambda = 1.0;
  params.gamma = 0.1;
  params.mu = 1.0;
  params.n_controllers = 2;
  params.p = 2.0;
  params.kappa = 1.0;
  params.alpha = 0.5;
  params.beta = 0.5;
  Certificate cert = certify_volume(params, 1.0);
  if (!cert.satisfied() ||
      std::abs(cert.constant("exponent") - 0.175) > 1e-12) {
    check(index, false, "certificate exponent mismatch");
    return;
  }
  ControllerSpec volume;
  volume.kind = ControllerKind::VolumeElements;
  Field u0 = initial_random_smooth(dom, 7);
  SimulateOptions opts;
  opts.t_final = 8.0;
  opts.dt = 1e-3;
  opts.sample_every = 0.05;
  TrajectoryRecord rec = simulate(u0, params, volume, opts);
  EnvelopeReport rep = verify_envelope(rec, cert, envelope_slack(opts.dt));
  check(index, rep.pass,
        "worst envelope ratio " + format_double(rep.worst_ratio));
}

TrajectoryRecord g_a3_record;  // shared with a4

// Modal control: L2 envelope with omega = 1.75 plus the fitted rate.
void a3(int index) {
  auto dom = make_interval(kPi, 64, BoundaryCondition::Dirichlet);
  CGLEParams params;
  params.lambda = 1.0;
  params.alpha = 1.0;
  params.kappa = 1.0;
  params.beta = 1.0;
  params.gamma = 0.5;
  params.mu = 1.0;
  params.p = 2.0;
  params.n_controllers = 1;
  EigenSystem sys = eigen_system(dom, 2);
  Certificate cert = certify_modal_l2(params, sys);
  if (!cert.satisfied() || std::abs(cert.constant("omega") - 1.75) > 1e-12) {
    check(index, false, "certificate omega mismatch");
    return;
  }
  ControllerSpec modal;
  modal.kind = ControllerKind::Modal;
  Field u0 = initial_random_smooth(dom, 5);
  SimulateOptions opts;
  opts.t_final = 8.0;
  opts.dt = 1e-3;
  opts.sample_every = 0.05;
  g_a3_record = simulate(u0, params, modal, opts);
  EnvelopeReport rep =
      verify_envelope(g_a3_record, cert, envelope_slack(opts.dt));
  DecayFit fit = fit_decay_rate(sample_times(g_a3_record),
                                series_l2_sq(g_a3_record), 0.5);
  const bool rate_ok = fit.rate >= 0.99 * 1.75;
  check(index, rep.pass && rate_ok,
        "envelope " + std::string(rep.pass ? "ok" : "violated") +
            ", fitted rate " + format_double(fit.rate));
}

// Same trajectory: H1 seminorm decays at least at the certified delta.
void a4(int index) {
  if (g_a3_record.samples.empty()) {
    check(index, false, "no A3 trajectory available");
    return;
  }
  auto dom = make_interval(kPi, 64, BoundaryCondition::Dirichlet);
  CGLEParams params = g_a3_record.params;
  Certificate cert =
      certify_modal_h1(params, eigen_system(dom, 2), 1, std::nullopt);
  const double delta = cert.constant("delta");
  if (!cert.satisfied() || std::abs(delta - 0.875) > 1e-12) {
    check(index, false, "certificate delta mismatch");
    return;
  }
  DecayFit fit = fit_decay_rate(sample_times(g_a3_record),
                                series_h1_semi_sq(g_a3_record), 0.5);
  check(index, fit.rate >= delta,
        "fitted H1 rate " + format_double(fit.rate) + " vs delta " +
            format_double(delta));
}

// Steering toward an arbitrary solution: deviation envelope at omega.
void a5(int index) {
  auto dom = make_interval(kPi, 64, BoundaryCondition::Dirichlet);
  CGLEParams params;
  params.lambda = 1.0;
  params.alpha = 1.0;
  params.kappa = 2.0;
  params.beta = 1.0;
  params.gamma = 0.5;
  params.mu = 1.0;
  params.p = 2.0;
  params.n_controllers = 1;
  Certificate cert = certify_steering1(params, eigen_system(dom, 2));
  if (!cert.satisfied()) {
    check(index, false, "certificate unexpectedly unsatisfied");
    return;
  }
  ControllerSpec steer;
  steer.kind = ControllerKind::Steering;
  steer.target = SteeringTarget::AnySolution;
  Field u0 = initial_random_smooth(dom, 13);
  Field v0 = initial_random_smooth(dom, 11);
  SimulateOptions opts;
  opts.t_final = 8.0;
  opts.dt = 1e-3;
  opts.sample_every = 0.05;
  TrajectoryRecord rec = simulate(u0, params, steer, opts, v0);
  EnvelopeReport rep = verify_envelope(rec, cert, envelope_slack(opts.dt));
  check(index, rep.pass,
        "worst envelope ratio " + format_double(rep.worst_ratio));
}

// Steering toward a stable target: both theorem cases, theorem and corollary.
void a6(int index) {
  auto dom = make_interval(kPi, 64, BoundaryCondition::Dirichlet);
  CGLEParams params;
  params.lambda = 1.0;
  params.alpha = 1.0;
  params.kappa = 2.0;
  params.beta = 1.0;
  params.gamma = 0.5;
  params.mu = 1.0;
  params.p = 2.0;
  params.n_controllers = 1;
  EigenSystem sys = eigen_system(dom, 2);

  Field u0 = initial_random_smooth(dom, 13);
  Field v0 = initial_random_smooth(dom, 11);
  ControllerSpec steer;
  steer.kind = ControllerKind::Steering;
  steer.target = SteeringTarget::StableTarget;
  SimulateOptions opts;
  opts.t_final = 8.0;
  opts.dt = 1e-3;
  opts.sample_every = 0.05;

  std::string detail;
  bool all_ok = true;
  const struct {
    double gamma_tilde;
    int expected_case;
    double expected_omega_tilde;
  } cases[] = {{0.5, 1, 0.75}, {0.1, 2, -0.05}};
  for (const auto& c : cases) {
    params.gamma_tilde = c.gamma_tilde;
    Certificate cert = certify_steering2(params, sys);
    if (!cert.satisfied() || cert.steering_case != c.expected_case ||
        std::abs(cert.constant("omega_tilde") - c.expected_omega_tilde) >
            1e-12 ||
        std::abs(cert.constant("epsilon") - 0.0875) > 1e-12) {
      all_ok = false;
      detail += "certificate mismatch for gamma_tilde=" +
                format_double(c.gamma_tilde) + "; ";
      continue;
    }
    TrajectoryRecord rec = simulate(u0, params, steer, opts, v0);
    EnvelopeReport theorem =
        verify_envelope(rec, cert, envelope_slack(opts.dt));
    EnvelopeReport corollary = verify_envelope(
        rec, cert, envelope_slack(opts.dt), EnvelopeKind::Corollary);
    if (!theorem.pass || !corollary.pass) {
      all_ok = false;
      detail += "case " + std::to_string(c.expected_case) +
                " theorem ratio " + format_double(theorem.worst_ratio) +
                " corollary ratio " + format_double(corollary.worst_ratio) +
                "; ";
    }
  }
  check(index, all_ok, detail.empty() ? "-" : detail);
}

// Nodal spikes: certified rate 0.43315 bounds the unsquared norm.
void a7(int index) {
  auto dom = make_interval(kPi, 63, BoundaryCondition::Dirichlet);
  CGLEParams params;
  params.lambda = 1.0;
  params.mu = 1.0;
  params.gamma = 0.2;
  params.kappa = 1.0;
  params.alpha = 0.5;
  params.beta = 0.5;
  params.p = 2.0;
  params.n_controllers = 4;
  Certificate cert = certify_nodal(params, kPi);
  if (!cert.satisfied() || std::abs(cert.constant("rate") - 0.43315) > 1e-5) {
    check(index, false, "certificate rate mismatch");
    return;
  }
  ControllerSpec nodal;
  nodal.kind = ControllerKind::Nodal;
  Field u0 = initial_random_smooth(dom, 17);
  SimulateOptions opts;
  opts.t_final = 8.0;
  opts.dt = 1e-3;
  opts.sample_every = 0.05;
  TrajectoryRecord rec = simulate(u0, params, nodal, opts);
  EnvelopeReport rep = verify_envelope(rec, cert, envelope_slack(opts.dt));
  check(index, rep.pass,
        "worst envelope ratio " + format_double(rep.worst_ratio));
}

// Interpolation inequality sampled over random smooth fields.
void a8(int index) {
  auto dom = make_interval(1.0, 65, BoundaryCondition::Neumann);
  double min_margin = std::numeric_limits<double>::infinity();
  for (int n : {2, 4, 8})
    for (int seed = 0; seed < 100; ++seed) {
      Field u = initial_random_smooth(dom, seed);
      min_margin = std::min(min_margin, interpolant_margin(u, n));
    }
  check(index, min_margin >= -1e-10,
        "minimum margin " + format_double(min_margin));
}

// Parseval identity and eigenfunction Gram matrix at round-off.
void a9(int index) {
  auto dir = make_interval(kPi, 64, BoundaryCondition::Dirichlet);
  auto neu = make_interval(1.0, 65, BoundaryCondition::Neumann);
  double worst_parseval = 0.0;
  for (int seed = 0; seed < 50; ++seed) {
    worst_parseval = std::max(
        worst_parseval, parseval_residual(initial_random_smooth(dir, seed)));
    worst_parseval = std::max(
        worst_parseval, parseval_residual(initial_random_smooth(neu, seed)));
  }
  double worst_gram = 0.0;
  for (const DomainPtr& dom : {dir, neu}) {
    const auto& w = dom->quadrature_weights();
    for (int k = 0; k < dom->max_modes(); ++k) {
      Eigen::VectorXd wk = dom->eigenfunction_values(k);
      for (int l = k; l < dom->max_modes(); ++l) {
        Eigen::VectorXd wl = dom->eigenfunction_values(l);
        const double gram = (w.array() * wk.array() * wl.array()).sum();
        worst_gram =
            std::max(worst_gram, std::abs(gram - (k == l ? 1.0 : 0.0)));
      }
    }
  }
  check(index, worst_parseval <= 1e-9 && worst_gram <= 1e-10,
        "parseval " + format_double(worst_parseval) + ", gram " +
            format_double(worst_gram));
}

std::string g_cli;

// Temporal convergence study through the CLI: observed order >= 1.9.
void a10(int index) {
  std::string body;
  body += "domain = \"interval\"\nbc = \"dirichlet\"\n";
  body += "length = " + format_double(kPi) + "\n";
  body += "grid_points = 32\ncontroller = \"modal\"\n";
  body += "lambda = 1\nalpha = 2\nkappa = 0\nbeta = 0\ngamma = 0.5\n";
  body += "mu = 1\nn_controllers = 1\n";
  body += "ic = \"random_smooth\"\nic_seed = 3\n";
  const std::string config = write_config("a10_converge.toml", body);
  CliResult res = run_cli("'" + g_cli + "' converge --config '" + config +
                          "' --dts 0.01,0.005,0.0025");
  if (res.exit_code != 0) {
    check(index, false, "exit code " + std::to_string(res.exit_code));
    return;
  }
  std::istringstream lines(res.output);
  std::string line;
  std::getline(lines, line);  // header
  std::vector<double> orders;
  while (std::getline(lines, line)) {
    const auto c1 = line.find(','), c2 = line.rfind(',');
    if (c1 == std::string::npos || c2 == c1) continue;
    const std::string order_text = line.substr(c2 + 1);
    if (!order_text.empty()) orders.push_back(std::stod(order_text));
  }
  bool ok = orders.size() == 2;
  std::string detail = "orders:";
  for (double o : orders) {
    detail += " " + format_double(o);
    ok = ok && o >= 1.9 && o <= 2.5;
  }
  check(index, ok, detail);
}

// Uncontrolled growth: exact factor e^2, gated exit 1, forced exit 2.
void a11(int index) {
  auto dom = make_interval(kPi, 64, BoundaryCondition::Dirichlet);
  CGLEParams params;
  params.lambda = 1.0;
  params.gamma = 1.5;
  params.mu = 0.0;
  params.n_controllers = 1;
  ControllerSpec modal;
  modal.kind = ControllerKind::Modal;
  Field u0 = initial_single_mode(dom, 1);
  SimulateOptions opts;
  opts.t_final = 2.0;
  opts.dt = 1e-3;
  opts.sample_every = 0.1;
  TrajectoryRecord rec = simulate(u0, params, modal, opts);
  const double growth =
      rec.samples.back().l2_sq / rec.samples.front().l2_sq;
  const bool growth_ok = std::abs(growth - std::exp(2.0)) <= 1e-6;

  std::string body;
  body += "domain = \"interval\"\nbc = \"dirichlet\"\n";
  body += "length = " + format_double(kPi) + "\n";
  body += "grid_points = 64\ncontroller = \"modal\"\n";
  body += "lambda = 1\nalpha = 0\nkappa = 0\nbeta = 0\ngamma = 1.5\n";
  body += "mu = 0\nn_controllers = 1\n";
  body += "ic = \"single_mode\"\nic_mode = 1\n";
  body += "t_final = 2\ndt = 0.001\nsample_every = 0.1\n";
  body += "out_dir = \"" + g_out_dir.string() + "\"\n";
  const std::string config = write_config("a11_growth.toml", body);
  CliResult gated = run_cli("'" + g_cli + "' run --config '" + config + "'");
  CliResult forced =
      run_cli("'" + g_cli + "' run --config '" + config + "' --force");
  check(index, growth_ok && gated.exit_code == 1 && forced.exit_code == 2,
        "growth " + format_double(growth) + ", gated exit " +
            std::to_string(gated.exit_code) + ", forced exit " +
            std::to_string(forced.exit_code));
}

// Single-hypothesis violations surface by name with exit code 1.
void a12(int index) {
  const std::string pi_text = format_double(kPi);
  struct Item {
    std::string name;
    std::string body;
    std::string hypothesis;
  };
  std::vector<Item> items;
  items.push_back(
      {"a12_volume.toml",
       "domain = \"interval\"\nbc = \"neumann\"\nlength = 1\n"
       "grid_points = 65\ncontroller = \"volume\"\n"
       "lambda = 1\nkappa = 1\ngamma = 0.3\nmu = 1\nn_controllers = 2\n",
       "assm1"});
  items.push_back(
      {"a12_modal.toml",
       "domain = \"interval\"\nbc = \"dirichlet\"\nlength = " + pi_text +
           "\ngrid_points = 64\ncontroller = \"modal\"\n"
           "lambda = 1\nkappa = 1\ngamma = 4.5\nmu = 5\nn_controllers = 1\n",
       "spectral_gap"});
  items.push_back(
      {"a12_steering.toml",
       "domain = \"interval\"\nbc = \"dirichlet\"\nlength = " + pi_text +
           "\ngrid_points = 64\ncontroller = \"steering\"\n"
           "steering_target = \"any\"\np = 2\n"
           "lambda = 1\nkappa = 1\nbeta = 1\ngamma = 0.5\nmu = 1\n"
           "n_controllers = 1\n",
       "kappa_beta_ratio"});
  items.push_back(
      {"a12_nodal.toml",
       "domain = \"interval\"\nbc = \"dirichlet\"\nlength = " + pi_text +
           "\ngrid_points = 63\ncontroller = \"nodal\"\n"
           "lambda = 1\nkappa = 1\ngamma = 0.2\nmu = 1\nn_controllers = 1\n",
       "lambda_ge_mu_h_sq"});

  bool all_ok = true;
  std::string detail;
  for (const auto& item : items) {
    const std::string config = write_config(item.name, item.body);
    CliResult res =
        run_cli("'" + g_cli + "' certify --config '" + config + "'");
    bool ok = res.exit_code == 1 && count_occurrences(res.output, "FAIL") == 1;
    if (ok) {
      // the single FAIL line must carry the expected hypothesis name
      std::istringstream lines(res.output);
      std::string line;
      bool named = false;
      while (std::getline(lines, line))
        if (line.find("FAIL") != std::string::npos)
          named = line.find(item.hypothesis) != std::string::npos;
      ok = named;
    }
    if (!ok) {
      all_ok = false;
      detail += item.hypothesis + " (exit " + std::to_string(res.exit_code) +
                ", FAILs " + std::to_string(count_occurrences(res.output,
                                                              "FAIL")) +
                "); ";
    }
  }
  check(index, all_ok, detail.empty() ? "-" : detail);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <path-to-cglectl>\n");
    return 2;
  }
  g_cli = argv[1];
  g_out_dir = std::filesystem::path("acceptance_out");
  std::filesystem::remove_all(g_out_dir);
  std::filesystem::create_directories(g_out_dir);

  run_criterion(1, a1);
  run_criterion(2, a2);
  run_criterion(3, a3);
  run_criterion(4, a4);
  run_criterion(5, a5);
  run_criterion(6, a6);
  run_criterion(7, a7);
  run_criterion(8, a8);
  run_criterion(9, a9);
  run_criterion(10, a10);
  run_criterion(11, a11);
  run_criterion(12, a12);

  if (g_failures > 0)
    std::printf("%d criteria failed\n", g_failures);
  else
    std::printf("all criteria passed\n");
  return g_failures == 0 ? 0 : 1;
}
