#include "cgle/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace cgle {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double to_double(const std::string& key, const std::string& value) {
  size_t used = 0;
  double out;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad number for '" + key + "'");
  }
  if (used != value.size())
    throw std::invalid_argument("config: bad number for '" + key + "'");
  return out;
}

long long to_int(const std::string& key, const std::string& value) {
  size_t used = 0;
  long long out;
  try {
    out = std::stoll(value, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad integer for '" + key + "'");
  }
  if (used != value.size())
    throw std::invalid_argument("config: bad integer for '" + key + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw std::invalid_argument("config: bad boolean for '" + key + "'");
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::vector<double> parse_value_list(const std::string& text) {
  const std::string body = trim(text);
  if (body.empty()) throw std::invalid_argument("empty value list");
  std::vector<double> out;
  if (body.find(':') != std::string::npos) {
    // start:stop:step, inclusive of stop up to round-off
    std::vector<std::string> parts;
    std::stringstream ss(body);
    std::string piece;
    while (std::getline(ss, piece, ':')) parts.push_back(trim(piece));
    if (parts.size() != 3)
      throw std::invalid_argument("range must be start:stop:step");
    const double start = to_double("range", parts[0]);
    const double stop = to_double("range", parts[1]);
    const double step = to_double("range", parts[2]);
    if (step <= 0.0 || stop < start)
      throw std::invalid_argument("range must advance forward");
    const double fuzz = 1e-12 * std::max(1.0, std::abs(stop));
    for (double v = start; v <= stop + fuzz; v += step) out.push_back(v);
  } else {
    std::stringstream ss(body);
    std::string piece;
    while (std::getline(ss, piece, ',')) {
      piece = trim(piece);
      if (piece.empty())
        throw std::invalid_argument("empty entry in value list");
      out.push_back(to_double("list", piece));
    }
  }
  if (out.empty()) throw std::invalid_argument("empty value list");
  return out;
}

void set_config_value(ExperimentConfig& c, const std::string& key,
                      const std::string& value) {
  if (key == "domain") c.domain = value;
  else if (key == "length") c.length = to_double(key, value);
  else if (key == "length_y") c.length_y = to_double(key, value);
  else if (key == "grid_points") c.grid_points = static_cast<int>(to_int(key, value));
  else if (key == "bc") c.bc = value;
  else if (key == "lambda") c.params.lambda = to_double(key, value);
  else if (key == "alpha") c.params.alpha = to_double(key, value);
  else if (key == "kappa") c.params.kappa = to_double(key, value);
  else if (key == "beta") c.params.beta = to_double(key, value);
  else if (key == "gamma") c.params.gamma = to_double(key, value);
  else if (key == "p") c.params.p = to_double(key, value);
  else if (key == "mu") c.params.mu = to_double(key, value);
  else if (key == "n_controllers")
    c.params.n_controllers = static_cast<int>(to_int(key, value));
  else if (key == "gamma_tilde") c.params.gamma_tilde = to_double(key, value);
  else if (key == "epsilon") c.params.epsilon = to_double(key, value);
  else if (key == "controller") c.controller = value;
  else if (key == "steering_target") c.steering_target = value;
  else if (key == "nodal_actuation") c.nodal_actuation = parse_value_list(value);
  else if (key == "nodal_observation")
    c.nodal_observation = parse_value_list(value);
  else if (key == "theorem") c.theorem = value;
  else if (key == "delta") c.delta = to_double(key, value);
  else if (key == "ic") c.ic = value;
  else if (key == "ic_mode") c.ic_mode = static_cast<int>(to_int(key, value));
  else if (key == "ic_seed")
    c.ic_seed = static_cast<unsigned long long>(to_int(key, value));
  else if (key == "ic_decay") c.ic_decay = to_double(key, value);
  else if (key == "ic_amplitude") c.ic_amplitude = to_double(key, value);
  else if (key == "ic_value_re") c.ic_value_re = to_double(key, value);
  else if (key == "ic_value_im") c.ic_value_im = to_double(key, value);
  else if (key == "target_ic") c.target_ic = value;
  else if (key == "target_ic_mode")
    c.target_ic_mode = static_cast<int>(to_int(key, value));
  else if (key == "target_ic_seed")
    c.target_ic_seed = static_cast<unsigned long long>(to_int(key, value));
  else if (key == "target_ic_decay") c.target_ic_decay = to_double(key, value);
  else if (key == "target_ic_amplitude")
    c.target_ic_amplitude = to_double(key, value);
  else if (key == "t_final") c.t_final = to_double(key, value);
  else if (key == "dt") c.dt = to_double(key, value);
  else if (key == "sample_every") c.sample_every = to_double(key, value);
  else if (key == "slack") c.slack = to_double(key, value);
  else if (key == "window_fraction")
    c.window_fraction = to_double(key, value);
  else if (key == "force") c.force = to_bool(key, value);
  else if (key == "out_dir") c.out_dir = value;
  else
    throw std::invalid_argument("config: unknown key '" + key + "'");
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig config;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    // strip comments, respecting quoted strings
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line = line.substr(0, i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": empty key or value");
    if (value.front() == '"') {
      if (value.size() < 2 || value.back() != '"')
        throw std::invalid_argument("config line " + std::to_string(lineno) +
                                    ": unterminated string");
      value = value.substr(1, value.size() - 2);
    }
    set_config_value(config, key, value);
  }
  return config;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

DomainPtr make_domain(const ExperimentConfig& config) {
  DomainSpec spec;
  if (config.domain == "interval") spec.kind = DomainKind::Interval;
  else if (config.domain == "rectangle") spec.kind = DomainKind::Rectangle;
  else throw std::invalid_argument("config: domain must be interval or rectangle");
  if (config.bc == "dirichlet") spec.bc = BoundaryCondition::Dirichlet;
  else if (config.bc == "neumann") spec.bc = BoundaryCondition::Neumann;
  else throw std::invalid_argument("config: bc must be dirichlet or neumann");
  spec.lengths = {config.length, config.length_y};
  spec.grid_points = config.grid_points;
  return build_domain(spec);
}

ControllerSpec make_controller(const ExperimentConfig& config) {
  ControllerSpec spec;
  if (config.controller == "none") spec.kind = ControllerKind::None;
  else if (config.controller == "volume") spec.kind = ControllerKind::VolumeElements;
  else if (config.controller == "modal") spec.kind = ControllerKind::Modal;
  else if (config.controller == "nodal") spec.kind = ControllerKind::Nodal;
  else if (config.controller == "steering") spec.kind = ControllerKind::Steering;
  else
    throw std::invalid_argument(
        "config: controller must be none, volume, modal, nodal, or steering");
  if (spec.kind == ControllerKind::Nodal && !config.nodal_actuation.empty()) {
    NodalPoints pts;
    pts.actuation = config.nodal_actuation;
    pts.observation = config.nodal_observation.empty()
                          ? config.nodal_actuation
                          : config.nodal_observation;
    spec.points = std::move(pts);
  }
  if (config.steering_target == "any")
    spec.target = SteeringTarget::AnySolution;
  else if (config.steering_target == "stable")
    spec.target = SteeringTarget::StableTarget;
  else
    throw std::invalid_argument("config: steering_target must be any or stable");
  return spec;
}

namespace {

Field build_initial(const DomainPtr& domain, const std::string& kind, int mode,
                    unsigned long long seed, double decay, double amplitude,
                    double value_re, double value_im) {
  if (kind == "single_mode")
    return initial_single_mode(domain, mode, Complex(amplitude, 0.0));
  if (kind == "random_smooth")
    return initial_random_smooth(domain, seed, decay, amplitude);
  if (kind == "constant")
    return initial_constant(domain, Complex(value_re, value_im));
  if (kind == "zero") return Field(domain);
  throw std::invalid_argument(
      "config: ic must be single_mode, random_smooth, constant, or zero");
}

}  // namespace

Field make_initial(const ExperimentConfig& config, const DomainPtr& domain) {
  return build_initial(domain, config.ic, config.ic_mode, config.ic_seed,
                       config.ic_decay, config.ic_amplitude, config.ic_value_re,
                       config.ic_value_im);
}

std::optional<Field> make_target_initial(const ExperimentConfig& config,
                                         const DomainPtr& domain) {
  if (config.controller != "steering") return std::nullopt;
  return build_initial(domain, config.target_ic, config.target_ic_mode,
                       config.target_ic_seed, config.target_ic_decay,
                       config.target_ic_amplitude, 0.0, 0.0);
}

std::string resolve_theorem(const ExperimentConfig& config) {
  std::string theorem = config.theorem;
  if (theorem.empty()) {
    if (config.controller == "none") theorem = "none";
    else if (config.controller == "volume") theorem = "volume";
    else if (config.controller == "modal") theorem = "modal_l2";
    else if (config.controller == "nodal") theorem = "nodal";
    else if (config.controller == "steering")
      theorem = (config.steering_target == "stable") ? "steering2" : "steering1";
  }
  const bool ok =
      (theorem == "none") ||
      (theorem == "volume" && config.controller == "volume") ||
      ((theorem == "modal_l2" || theorem == "modal_h1") &&
       config.controller == "modal") ||
      (theorem == "nodal" && config.controller == "nodal") ||
      (theorem == "steering1" && config.controller == "steering" &&
       config.steering_target == "any") ||
      (theorem == "steering2" && config.controller == "steering" &&
       config.steering_target == "stable");
  if (!ok)
    throw std::invalid_argument("config: theorem '" + theorem +
                                "' does not match controller '" +
                                config.controller + "'");
  return theorem;
}

std::optional<Certificate> make_certificate(const ExperimentConfig& config,
                                            const DomainPtr& domain) {
  const std::string theorem = resolve_theorem(config);
  if (theorem == "none") return std::nullopt;
  if (theorem == "volume") {
    if (domain->kind() != DomainKind::Interval ||
        domain->bc() != BoundaryCondition::Neumann)
      throw std::invalid_argument(
          "config: the volume theorem needs an interval Neumann domain");
    return certify_volume(config.params, config.length);
  }
  if (theorem == "nodal") {
    if (domain->kind() != DomainKind::Interval ||
        domain->bc() != BoundaryCondition::Dirichlet)
      throw std::invalid_argument(
          "config: the nodal theorem needs an interval Dirichlet domain");
    return certify_nodal(config.params, config.length);
  }
  EigenSystem eigsys = eigen_system(domain, config.params.n_controllers + 1);
  if (theorem == "modal_l2") return certify_modal_l2(config.params, eigsys);
  if (theorem == "modal_h1")
    return certify_modal_h1(config.params, eigsys, domain->dimension(),
                            config.delta);
  if (theorem == "steering1") return certify_steering1(config.params, eigsys);
  if (theorem == "steering2") return certify_steering2(config.params, eigsys);
  throw std::invalid_argument("config: unknown theorem '" + theorem + "'");
}

namespace {

void print_certificate(const Certificate& cert, std::ostream& out) {
  out << "theorem = " << theorem_name(cert.theorem);
  if (cert.steering_case != 0) out << " (case " << cert.steering_case << ")";
  out << "\n";
  out << "hypothesis                      status  margin\n";
  for (const auto& h : cert.hypotheses) {
    char line[128];
    std::snprintf(line, sizeof(line), "%-31s %-7s %s\n", h.name.c_str(),
                  h.satisfied ? "ok" : "FAIL", format_double(h.margin).c_str());
    out << line;
  }
  for (const auto& [key, value] : cert.constants)
    out << key << " = " << format_double(value) << "\n";
  for (const auto& note : cert.notes) out << "note: " << note << "\n";
  out << "certificate = " << (cert.satisfied() ? "satisfied" : "NOT satisfied")
      << "\n";
}

struct CsvCell {
  std::optional<double> value;
};

std::ostream& operator<<(std::ostream& os, const CsvCell& cell) {
  if (cell.value) os << format_double(*cell.value);
  return os;
}

void write_trajectory_csv(const std::filesystem::path& path,
                          const TrajectoryRecord& rec,
                          const Certificate* cert) {
  std::ofstream csv(path, std::ios::binary);
  if (!csv)
    throw std::runtime_error("cannot write trajectory CSV: " + path.string());
  csv << "t,l2_sq,h1_semi_sq,lpp,envelope,z_l2_sq,v_l2_sq\n";
  InitialNorms init;
  if (!rec.samples.empty()) {
    init.u_l2_sq = rec.samples.front().l2_sq;
    init.u_h1_semi_sq = rec.samples.front().h1_semi_sq;
    init.z_l2_sq = rec.samples.front().z_l2_sq;
    init.v_l2_sq = rec.samples.front().v_l2_sq;
  }
  const bool with_envelope = cert && cert->theorem != Theorem::ModalH1;
  for (const auto& s : rec.samples) {
    CsvCell envelope;
    if (with_envelope)
      envelope.value = detail::envelope_value(*cert, init, s.t, false);
    csv << format_double(s.t) << ',' << format_double(s.l2_sq) << ','
        << format_double(s.h1_semi_sq) << ',' << format_double(s.lpp) << ','
        << envelope << ',' << CsvCell{s.z_l2_sq} << ',' << CsvCell{s.v_l2_sq}
        << '\n';
  }
}

void write_kv(std::ostream& os, const std::string& key, const std::string& v) {
  os << key << " = \"" << v << "\"\n";
}
void write_kv(std::ostream& os, const std::string& key, double v) {
  os << key << " = " << format_double(v) << "\n";
}
void write_kv(std::ostream& os, const std::string& key, bool v) {
  os << key << " = " << (v ? "true" : "false") << "\n";
}

}  // namespace

int cmd_certify(const ExperimentConfig& config, std::ostream& out) {
  try {
    DomainPtr domain = make_domain(config);
    make_controller(config);
    std::optional<Certificate> cert = make_certificate(config, domain);
    if (!cert) {
      out << "error: no theorem to certify (controller = none)\n";
      return kExitConfigError;
    }
    print_certificate(*cert, out);
    return cert->satisfied() ? kExitOk : kExitHypothesisFailure;
  } catch (const std::invalid_argument& e) {
    out << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
}

int cmd_run(const ExperimentConfig& config, const std::string& stem,
            std::ostream& out) {
  std::optional<Certificate> cert;
  DomainPtr domain;
  ControllerSpec controller;
  Field u0;
  std::optional<Field> v0;
  try {
    domain = make_domain(config);
    controller = make_controller(config);
    cert = make_certificate(config, domain);
    u0 = make_initial(config, domain);
    v0 = make_target_initial(config, domain);
    if (config.t_final <= 0.0)
      throw std::invalid_argument("config: t_final must be positive");
  } catch (const std::invalid_argument& e) {
    out << "error: " << e.what() << "\n";
    return kExitConfigError;
  }

  if (cert) print_certificate(*cert, out);
  if (cert && !cert->satisfied() && !config.force) {
    out << "hypotheses failed; not running (use --force to override)\n";
    return kExitHypothesisFailure;
  }

  SimulateOptions opts;
  opts.t_final = config.t_final;
  opts.dt = config.dt;
  opts.sample_every = config.sample_every;
  const double dt_resolved =
      config.dt > 0.0 ? config.dt : default_dt(config.params, u0);
  const double slack =
      config.slack >= 0.0 ? config.slack : envelope_slack(dt_resolved);

  const auto started = std::chrono::steady_clock::now();
  TrajectoryRecord rec;
  bool diverged = false;
  double diverged_at = 0.0;
  try {
    rec = simulate(u0, config.params, controller, opts, v0);
  } catch (const SimulationDiverged& d) {
    rec = d.partial;
    diverged = true;
    diverged_at = d.time;
  } catch (const std::invalid_argument& e) {
    out << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();

  std::filesystem::path out_dir(config.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  const auto csv_path = out_dir / (stem + "_trajectory.csv");
  write_trajectory_csv(csv_path, rec, cert ? &*cert : nullptr);

  // Verification: fitted-rate check for modal_h1, envelope otherwise.
  int exit_code = kExitOk;
  std::optional<EnvelopeReport> theorem_report, corollary_report;
  std::optional<DecayFit> h1_fit;
  if (diverged) {
    out << "diverged at t = " << format_double(diverged_at) << "\n";
    exit_code = kExitEnvelopeViolation;
  } else if (cert) {
    if (cert->theorem == Theorem::ModalH1) {
      const double delta = cert->constant("delta");
      try {
        h1_fit = fit_decay_rate(sample_times(rec), series_h1_semi_sq(rec),
                                config.window_fraction);
        out << "fitted h1 rate = " << format_double(h1_fit->rate)
            << " (required >= " << format_double(delta) << ")\n";
        if (h1_fit->rate < delta) exit_code = kExitEnvelopeViolation;
      } catch (const std::invalid_argument& e) {
        out << "error: " << e.what() << "\n";
        exit_code = kExitEnvelopeViolation;
      }
    } else {
      theorem_report =
          verify_envelope(rec, *cert, slack, EnvelopeKind::Theorem,
                          config.force);
      out << "envelope check: " << (theorem_report->pass ? "pass" : "VIOLATED")
          << ", worst ratio = " << format_double(theorem_report->worst_ratio)
          << "\n";
      if (!theorem_report->pass) exit_code = kExitEnvelopeViolation;
      if (cert->theorem == Theorem::Steering2) {
        corollary_report = verify_envelope(rec, *cert, slack,
                                           EnvelopeKind::Corollary,
                                           config.force);
        out << "corollary check: "
            << (corollary_report->pass ? "pass" : "VIOLATED")
            << ", worst ratio = "
            << format_double(corollary_report->worst_ratio) << "\n";
        if (!corollary_report->pass) exit_code = kExitEnvelopeViolation;
      }
    }
  }

  const auto record_path = out_dir / (stem + "_record.toml");
  std::ofstream record(record_path, std::ios::binary);
  if (record) {
    write_kv(record, "domain", config.domain);
    write_kv(record, "bc", config.bc);
    write_kv(record, "length", config.length);
    if (config.domain == "rectangle")
      write_kv(record, "length_y", config.length_y);
    write_kv(record, "grid_points", static_cast<double>(config.grid_points));
    write_kv(record, "controller", config.controller);
    write_kv(record, "theorem",
             cert ? theorem_name(cert->theorem) : std::string("none"));
    write_kv(record, "lambda", config.params.lambda);
    write_kv(record, "alpha", config.params.alpha);
    write_kv(record, "kappa", config.params.kappa);
    write_kv(record, "beta", config.params.beta);
    write_kv(record, "gamma", config.params.gamma);
    write_kv(record, "p", config.params.p);
    write_kv(record, "mu", config.params.mu);
    write_kv(record, "n_controllers",
             static_cast<double>(config.params.n_controllers));
    if (config.params.gamma_tilde)
      write_kv(record, "gamma_tilde", *config.params.gamma_tilde);
    write_kv(record, "t_final", config.t_final);
    write_kv(record, "dt_resolved", rec.dt);
    write_kv(record, "sample_every", rec.sample_every);
    write_kv(record, "slack_used", slack);
    write_kv(record, "force", config.force);
    write_kv(record, "samples", static_cast<double>(rec.samples.size()));
    if (cert) {
      write_kv(record, "certificate_satisfied", cert->satisfied());
      for (const auto& [key, value] : cert->constants)
        write_kv(record, "certificate_" + key, value);
    }
    write_kv(record, "diverged", diverged);
    if (diverged) write_kv(record, "diverged_at", diverged_at);
    if (theorem_report) {
      write_kv(record, "envelope_pass", theorem_report->pass);
      write_kv(record, "envelope_worst_ratio", theorem_report->worst_ratio);
      if (theorem_report->first_violation)
        write_kv(record, "envelope_first_violation",
                 *theorem_report->first_violation);
    }
    if (corollary_report) {
      write_kv(record, "corollary_pass", corollary_report->pass);
      write_kv(record, "corollary_worst_ratio",
               corollary_report->worst_ratio);
    }
    if (h1_fit) write_kv(record, "fitted_h1_rate", h1_fit->rate);
    try {
      DecayFit l2_fit = fit_decay_rate(sample_times(rec), series_l2_sq(rec),
                                       config.window_fraction);
      write_kv(record, "fitted_l2_rate", l2_fit.rate);
    } catch (const std::invalid_argument&) {
      // short or floored series; the fit is informational here
    }
    write_kv(record, "duration_seconds", seconds);
    write_kv(record, "trajectory_csv", csv_path.filename().string());
  }

  out << "wrote " << csv_path.string() << "\n";
  return exit_code;
}

int cmd_sweep(const ExperimentConfig& config, const std::string& param,
              const std::vector<double>& values, const std::string& stem,
              std::ostream& out, std::vector<SweepRow>* rows_out) {
  try {
    if (values.empty()) throw std::invalid_argument("sweep: empty value list");
    {  // validate the parameter name up front
      ExperimentConfig probe = config;
      set_config_value(probe, param, format_double(values.front()));
    }

    std::vector<SweepRow> rows(values.size());
    std::atomic<size_t> next{0};
    auto worker = [&]() {
      while (true) {
        const size_t i = next.fetch_add(1);
        if (i >= values.size()) return;
        SweepRow& row = rows[i];
        row.value = values[i];
        try {
          ExperimentConfig point = config;
          set_config_value(point, param, format_double(values[i]));
          DomainPtr domain = make_domain(point);
          std::optional<Certificate> cert = make_certificate(point, domain);
          if (!cert) throw std::invalid_argument("sweep: no theorem to certify");
          row.satisfied = cert->satisfied();
          if (row.satisfied) {
            row.exponent = cert->constant("exponent");
            Field u0 = make_initial(point, domain);
            SimulateOptions opts;
            opts.t_final = point.t_final;
            opts.dt = point.dt;
            opts.sample_every = point.sample_every;
            TrajectoryRecord rec =
                simulate(u0, point.params, make_controller(point), opts,
                         make_target_initial(point, domain));
            row.fitted_rate =
                fit_decay_rate(sample_times(rec), series_l2_sq(rec),
                               point.window_fraction)
                    .rate;
          }
        } catch (const std::exception& e) {
          row.error = e.what();
        }
      }
    };
    const size_t n_workers =
        std::min(values.size(),
                 static_cast<size_t>(
                     std::max(1u, std::thread::hardware_concurrency())));
    std::vector<std::thread> pool;
    for (size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    std::ostringstream csv;
    csv << "param_value,satisfied,exponent,fitted_rate\n";
    for (const auto& row : rows) {
      csv << format_double(row.value) << ','
          << (row.satisfied ? "true" : "false") << ',';
      if (row.exponent) csv << format_double(*row.exponent);
      csv << ',';
      if (row.fitted_rate) csv << format_double(*row.fitted_rate);
      csv << '\n';
    }
    out << csv.str();

    std::filesystem::path out_dir(config.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    std::ofstream file(out_dir / (stem + "_sweep.csv"), std::ios::binary);
    file << csv.str();

    if (rows_out) *rows_out = rows;
    const bool all_failed = std::all_of(
        rows.begin(), rows.end(),
        [](const SweepRow& r) { return !r.error.empty(); });
    return all_failed ? kExitConfigError : kExitOk;
  } catch (const std::invalid_argument& e) {
    out << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
}

int cmd_converge(const ExperimentConfig& config,
                 const std::vector<double>& dts, std::ostream& out,
                 std::vector<ConvergeRow>* rows_out) {
  try {
    if (dts.empty()) throw std::invalid_argument("converge: empty dt list");
    if (config.params.kappa != 0.0 || config.params.beta != 0.0)
      throw std::invalid_argument(
          "converge: the oracle study requires kappa = 0 and beta = 0");
    if (config.controller != "none" && config.controller != "modal")
      throw std::invalid_argument(
          "converge: the closed-form oracle covers controller none or modal");
    DomainPtr domain = make_domain(config);
    Field u0 = make_initial(config, domain);
    ControllerSpec controller = make_controller(config);

    // Oracle endpoint over the full band at t = 1.
    ModalCoeffs c0 = to_modal(u0, domain->max_modes());
    Field u_exact =
        from_modal(linear_modal_exact(c0, config.params, 1.0));
    const Eigen::VectorXd& w = domain->quadrature_weights();
    double ref_sq = 0.0;
    for (int i = 0; i < u_exact.size(); ++i)
      ref_sq += w[i] * std::norm(u_exact.values()[i]);
    if (ref_sq <= 0.0)
      throw std::invalid_argument("converge: oracle endpoint is zero");

    std::vector<ConvergeRow> rows;
    for (const double dt : dts) {
      if (dt <= 0.0)
        throw std::invalid_argument("converge: dt values must be positive");
      SimulateOptions opts;
      opts.t_final = 1.0;
      opts.dt = dt;
      opts.sample_every = 1.0;
      opts.stepping = ControlStepping::ExplicitStages;
      TrajectoryRecord rec = simulate(u0, config.params, controller, opts);
      double err_sq = 0.0;
      for (int i = 0; i < u_exact.size(); ++i)
        err_sq += w[i] * std::norm(rec.final_state.values()[i] -
                                   u_exact.values()[i]);
      ConvergeRow row;
      row.dt = dt;
      row.error = std::sqrt(err_sq / ref_sq);
      if (!rows.empty() && rows.back().error > 0.0 && row.error > 0.0 &&
          rows.back().dt != dt)
        row.order = std::log(rows.back().error / row.error) /
                    std::log(rows.back().dt / dt);
      rows.push_back(row);
    }

    out << "dt,error,order\n";
    for (const auto& row : rows) {
      out << format_double(row.dt) << ',' << format_double(row.error) << ',';
      if (row.order) out << format_double(*row.order);
      out << '\n';
    }
    if (rows_out) *rows_out = rows;
    return kExitOk;
  } catch (const std::invalid_argument& e) {
    out << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
}

}  // namespace cgle
