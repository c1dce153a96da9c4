#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "cgle/experiment.hpp"

using namespace cgle;
using Catch::Matchers::WithinAbs;

namespace {

constexpr double kPi = std::numbers::pi;

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path fresh_dir(const std::string& name) {
  std::filesystem::path dir = std::filesystem::path("exp_out") / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// A well-posed modal setup: omega = 1.75, actual decay is faster.
std::string modal_config_text() {
  std::string text;
  text += "domain = \"interval\"\n";
  text += "bc = \"dirichlet\"\n";
  text += "length = " + format_double(kPi) + "\n";
  text += "grid_points = 32\n";
  text += "controller = \"modal\"\n";
  text += "lambda = 1\nalpha = 1\nkappa = 1\nbeta = 1\ngamma = 0.5\n";
  text += "p = 2\nmu = 1\nn_controllers = 1\n";
  text += "ic = \"random_smooth\"\nic_seed = 5\n";
  text += "t_final = 2\ndt = 0.001\nsample_every = 0.05\n";
  return text;
}

}  // namespace

TEST_CASE("config parser handles the full key set", "[experiment]") {
  const std::string text =
      "# experiment description\n"
      "domain = \"interval\"   # trailing comment\n"
      "bc = neumann\n"
      "length = 2.5\n"
      "grid_points = 48\n"
      "controller = \"volume\"\n"
      "mu = 1.25\n"
      "gamma = 0.1\n"
      "n_controllers = 4\n"
      "force = true\n"
      "ic = random_smooth\n"
      "ic_seed = 99\n"
      "nodal_actuation = \"0.1, 0.5, 0.9\"\n"
      "\n"
      "out_dir = \"somewhere\"\n";
  ExperimentConfig c = parse_config_text(text);
  REQUIRE(c.domain == "interval");
  REQUIRE(c.bc == "neumann");
  REQUIRE_THAT(c.length, WithinAbs(2.5, 1e-15));
  REQUIRE(c.grid_points == 48);
  REQUIRE(c.controller == "volume");
  REQUIRE_THAT(c.params.mu, WithinAbs(1.25, 1e-15));
  REQUIRE(c.params.n_controllers == 4);
  REQUIRE(c.force);
  REQUIRE(c.ic_seed == 99);
  REQUIRE(c.nodal_actuation == std::vector<double>{0.1, 0.5, 0.9});
  REQUIRE(c.out_dir == "somewhere");
}

TEST_CASE("config parser rejects malformed input", "[experiment]") {
  REQUIRE_THROWS_WITH(parse_config_text("volume = 3\n"),
                      Catch::Matchers::ContainsSubstring("unknown key"));
  REQUIRE_THROWS_AS(parse_config_text("gamma 0.5\n"), std::invalid_argument);
  REQUIRE_THROWS_AS(parse_config_text("gamma = abc\n"), std::invalid_argument);
  REQUIRE_THROWS_AS(parse_config_text("grid_points = 64.5\n"),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(parse_config_text("force = yes\n"), std::invalid_argument);
  REQUIRE_THROWS_AS(parse_config_text("domain = \"interval\ngamma = 1\n"),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(parse_config_text("gamma =\n"), std::invalid_argument);
}

TEST_CASE("value lists accept enumerations and ranges", "[experiment]") {
  REQUIRE(parse_value_list("1, 2, 3") == std::vector<double>{1.0, 2.0, 3.0});
  const auto range = parse_value_list("0.5:2:0.5");
  REQUIRE(range.size() == 4);
  REQUIRE_THAT(range.front(), WithinAbs(0.5, 1e-15));
  REQUIRE_THAT(range.back(), WithinAbs(2.0, 1e-12));
  REQUIRE_THROWS_AS(parse_value_list(""), std::invalid_argument);
  REQUIRE_THROWS_AS(parse_value_list("1:2"), std::invalid_argument);
  REQUIRE_THROWS_AS(parse_value_list("2:1:0.5"), std::invalid_argument);
  REQUIRE_THROWS_AS(parse_value_list("1,,2"), std::invalid_argument);
}

TEST_CASE("serialized doubles survive the round trip", "[experiment]") {
  REQUIRE(format_double(0.1) == "0.10000000000000001");
  REQUIRE(format_double(1.0) == "1");
  for (double x : {kPi, 1.0 / 3.0, 1e-17, 12345.6789}) {
    REQUIRE(std::stod(format_double(x)) == x);
  }
}

TEST_CASE("theorem resolution follows the controller", "[experiment]") {
  ExperimentConfig c;
  c.controller = "modal";
  REQUIRE(resolve_theorem(c) == "modal_l2");
  c.theorem = "modal_h1";
  REQUIRE(resolve_theorem(c) == "modal_h1");
  c.theorem.clear();
  c.controller = "steering";
  REQUIRE(resolve_theorem(c) == "steering1");
  c.steering_target = "stable";
  REQUIRE(resolve_theorem(c) == "steering2");
  c.controller = "none";
  c.steering_target = "any";
  REQUIRE(resolve_theorem(c) == "none");
  c.controller = "volume";
  c.theorem = "nodal";
  REQUIRE_THROWS_AS(resolve_theorem(c), std::invalid_argument);
}

TEST_CASE("certificates require the matching domain", "[experiment]") {
  ExperimentConfig c = parse_config_text(modal_config_text());
  c.controller = "volume";  // volume theorem needs Neumann
  REQUIRE_THROWS_AS(make_certificate(c, make_domain(c)),
                    std::invalid_argument);
  c.controller = "nodal";
  c.bc = "neumann";
  c.grid_points = 33;
  REQUIRE_THROWS_AS(make_certificate(c, make_domain(c)),
                    std::invalid_argument);
}

TEST_CASE("certify prints margins and signals failures", "[experiment]") {
  ExperimentConfig good = parse_config_text(modal_config_text());
  std::ostringstream out;
  REQUIRE(cmd_certify(good, out) == kExitOk);
  REQUIRE(out.str().find("certificate = satisfied") != std::string::npos);
  REQUIRE(out.str().find("omega = 1.75") != std::string::npos);

  ExperimentConfig bad = good;
  bad.params.mu = 0.2;  // mu < gamma
  std::ostringstream bad_out;
  REQUIRE(cmd_certify(bad, bad_out) == kExitHypothesisFailure);
  REQUIRE(bad_out.str().find("mu_ge_gamma") != std::string::npos);
  REQUIRE(bad_out.str().find("FAIL") != std::string::npos);

  ExperimentConfig none = good;
  none.controller = "none";
  none.theorem.clear();
  std::ostringstream none_out;
  REQUIRE(cmd_certify(none, none_out) == kExitConfigError);
}

TEST_CASE("run writes the trajectory, record, and verdict", "[experiment]") {
  auto dir = fresh_dir("run");
  ExperimentConfig c = parse_config_text(modal_config_text());
  c.out_dir = dir.string();
  std::ostringstream out;
  REQUIRE(cmd_run(c, "modal", out) == kExitOk);
  REQUIRE(out.str().find("envelope check: pass") != std::string::npos);

  const std::string csv = slurp(dir / "modal_trajectory.csv");
  std::istringstream lines(csv);
  std::string header;
  std::getline(lines, header);
  REQUIRE(header == "t,l2_sq,h1_semi_sq,lpp,envelope,z_l2_sq,v_l2_sq");
  int rows = 0;
  std::string line;
  while (std::getline(lines, line)) {
    ++rows;
    // modal runs leave the steering columns empty but keep the envelope
    REQUIRE(line.substr(line.size() - 2) == ",,");
    REQUIRE(line.find(",,") == line.size() - 2);
  }
  REQUIRE(rows == 41);  // t = 0 plus 40 strides of 0.05 up to t = 2

  const std::string record = slurp(dir / "modal_record.toml");
  REQUIRE(record.find("certificate_satisfied = true") != std::string::npos);
  REQUIRE(record.find("envelope_pass = true") != std::string::npos);
  REQUIRE(record.find("fitted_l2_rate = ") != std::string::npos);

  SECTION("reruns are byte-identical") {
    auto dir2 = fresh_dir("run_again");
    c.out_dir = dir2.string();
    std::ostringstream out2;
    REQUIRE(cmd_run(c, "modal", out2) == kExitOk);
    REQUIRE(slurp(dir2 / "modal_trajectory.csv") == csv);
  }
}

TEST_CASE("run gates on failed hypotheses unless forced", "[experiment]") {
  auto dir = fresh_dir("gate");
  ExperimentConfig c = parse_config_text(modal_config_text());
  c.out_dir = dir.string();
  c.params.kappa = 0.0;  // kappa_positive fails; dynamics stay linear
  c.params.beta = 0.0;
  std::ostringstream out;
  REQUIRE(cmd_run(c, "gated", out) == kExitHypothesisFailure);
  REQUIRE_FALSE(std::filesystem::exists(dir / "gated_trajectory.csv"));

  c.force = true;
  std::ostringstream forced;
  // linear decay e^{-3t} easily beats the omega = 1.75 envelope
  REQUIRE(cmd_run(c, "forced", forced) == kExitOk);
  REQUIRE(std::filesystem::exists(dir / "forced_trajectory.csv"));
}

TEST_CASE("sweep re-certifies across the range in input order",
          "[experiment]") {
  auto dir = fresh_dir("sweep");
  ExperimentConfig c = parse_config_text(modal_config_text());
  c.out_dir = dir.string();
  std::ostringstream out;
  std::vector<SweepRow> rows;
  const int code =
      cmd_sweep(c, "mu", {0.2, 0.6, 1.0}, "gain", out, &rows);
  REQUIRE(code == kExitOk);
  REQUIRE(rows.size() == 3);
  REQUIRE_THAT(rows[0].value, WithinAbs(0.2, 1e-15));
  REQUIRE_FALSE(rows[0].satisfied);  // mu < gamma
  REQUIRE_FALSE(rows[0].exponent.has_value());
  REQUIRE(rows[1].satisfied);
  REQUIRE_THAT(*rows[1].exponent, WithinAbs(1.75, 1e-12));
  REQUIRE(rows[2].satisfied);
  REQUIRE(rows[2].fitted_rate.has_value());
  REQUIRE(*rows[2].fitted_rate > 1.75);

  const std::string csv = slurp(dir / "gain_sweep.csv");
  REQUIRE(csv.rfind("param_value,satisfied,exponent,fitted_rate\n", 0) == 0);

  std::ostringstream err;
  REQUIRE(cmd_sweep(c, "no_such_key", {1.0}, "bad", err) == kExitConfigError);
}

TEST_CASE("convergence study demands the linear setting", "[experiment]") {
  ExperimentConfig c = parse_config_text(modal_config_text());
  c.params.kappa = 0.0;
  c.params.beta = 0.0;
  std::ostringstream out;
  std::vector<ConvergeRow> rows;
  REQUIRE(cmd_converge(c, {0.01, 0.005}, out, &rows) == kExitOk);
  REQUIRE(rows.size() == 2);
  REQUIRE(rows[0].error > rows[1].error);
  REQUIRE(rows[1].order.has_value());
  REQUIRE(*rows[1].order > 1.7);
  REQUIRE(*rows[1].order < 2.3);
  REQUIRE(out.str().rfind("dt,error,order\n", 0) == 0);

  ExperimentConfig nonlinear = parse_config_text(modal_config_text());
  std::ostringstream err;
  REQUIRE(cmd_converge(nonlinear, {0.01}, err) == kExitConfigError);

  ExperimentConfig volume = parse_config_text(modal_config_text());
  volume.params.kappa = 0.0;
  volume.params.beta = 0.0;
  volume.controller = "volume";
  volume.bc = "neumann";
  volume.grid_points = 33;
  std::ostringstream err2;
  REQUIRE(cmd_converge(volume, {0.01}, err2) == kExitConfigError);
}
