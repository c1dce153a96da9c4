#include "cgle/certificates.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cgle {

namespace {

Hypothesis hyp(const std::string& name, double margin) {
  return Hypothesis{name, margin > 0.0, margin};
}

// Shared checks: the theorems are stated for kappa > 0 (the linear kappa = 0
// setting is reserved for the oracle mode).
Hypothesis kappa_positive(const CGLEParams& p) {
  return hyp("kappa_positive", p.kappa);
}

void require_modal_eigsys(const CGLEParams& params, const EigenSystem& eigsys,
                          const char* who) {
  if (!eigsys.domain())
    throw std::invalid_argument(std::string(who) + ": empty eigensystem");
  if (eigsys.domain()->bc() != BoundaryCondition::Dirichlet)
    throw std::invalid_argument(std::string(who) +
                                ": Dirichlet eigensystem required");
  if (eigsys.count() < params.n_controllers + 1)
    throw std::invalid_argument(std::string(who) +
                                ": eigensystem must cover modes 1..N+1");
}

}  // namespace

std::string theorem_name(Theorem t) {
  switch (t) {
    case Theorem::Volume: return "volume";
    case Theorem::ModalL2: return "modal_l2";
    case Theorem::ModalH1: return "modal_h1";
    case Theorem::Steering1: return "steering1";
    case Theorem::Steering2: return "steering2";
    case Theorem::Nodal: return "nodal";
  }
  return "?";
}

bool Certificate::satisfied() const {
  for (const auto& h : hypotheses)
    if (!h.satisfied) return false;
  return true;
}

double Certificate::constant(const std::string& key) const {
  auto it = constants.find(key);
  if (it == constants.end())
    throw std::out_of_range("certificate has no constant '" + key + "'");
  return it->second;
}

const Hypothesis* Certificate::find(const std::string& name) const {
  for (const auto& h : hypotheses)
    if (h.name == name) return &h;
  return nullptr;
}

Certificate certify_volume(const CGLEParams& params, double length) {
  params.validate(false);
  if (length <= 0.0)
    throw std::invalid_argument("certify_volume: length must be positive");
  const double n = params.n_controllers;
  Certificate cert;
  cert.theorem = Theorem::Volume;
  cert.hypotheses.push_back(kappa_positive(params));
  cert.hypotheses.push_back(hyp("mu_positive", params.mu));
  if (params.mu > 0.0) {
    const double budget =
        std::min(1.0 - 4.0 * params.gamma / params.mu,
                 4.0 * params.lambda / (params.mu * length * length));
    cert.hypotheses.push_back(hyp("assm1", budget - 1.0 / (n * n)));
    const double h = length / n;
    const double nu =
        0.5 - 2.0 * params.gamma / params.mu - 1.0 / (2.0 * n * n);
    cert.constants["nu"] = nu;
    cert.constants["m"] = 2.0 * params.lambda / params.mu - 0.5 * h * h;
    cert.constants["exponent"] = params.mu * nu;
  } else {
    cert.hypotheses.push_back(
        hyp("assm1", -std::numeric_limits<double>::infinity()));
  }
  return cert;
}

Certificate certify_modal_l2(const CGLEParams& params,
                             const EigenSystem& eigsys) {
  params.validate(false);
  require_modal_eigsys(params, eigsys, "certify_modal_l2");
  const double lam1 = eigsys.lambda(0);
  const double lam_next = eigsys.lambda(params.n_controllers);
  Certificate cert;
  cert.theorem = Theorem::ModalL2;
  cert.hypotheses.push_back(kappa_positive(params));
  cert.hypotheses.push_back(hyp("mu_ge_gamma", params.mu - params.gamma));
  cert.hypotheses.push_back(
      hyp("spectral_gap", lam_next - params.gamma / params.lambda));
  const double omega =
      2.0 * (params.lambda - params.gamma / lam_next) * lam1;
  cert.constants["omega"] = omega;
  cert.constants["exponent"] = omega;
  cert.constants["lambda_1"] = lam1;
  cert.constants["lambda_next"] = lam_next;
  return cert;
}

Certificate certify_modal_h1(const CGLEParams& params,
                             const EigenSystem& eigsys, int dimension,
                             std::optional<double> delta) {
  if (dimension != 1 && dimension != 2)
    throw std::invalid_argument("certify_modal_h1: dimension must be 1 or 2");
  Certificate cert = certify_modal_l2(params, eigsys);
  cert.theorem = Theorem::ModalH1;
  const double omega = cert.constant("omega");
  const double d = delta.value_or(0.5 * omega);
  if (d <= 0.0 || d >= omega)
    throw std::invalid_argument(
        "certify_modal_h1: delta must lie in (0, omega)");
  cert.constants["delta"] = d;

  const double n = dimension;
  const double p = params.p;
  const double critical = 4.0 / n;
  if (p < critical) {
    cert.hypotheses.push_back(hyp("p_subcritical", critical - p));
    const double theta = n * p / (4.0 * (p + 2.0));
    const double xi = ((n + 2.0) * p + 4.0) / (4.0 * (p + 2.0));
    const double a = n * p / 4.0;
    const double b = (4.0 - n) * p / 4.0;
    const double zeta = 2.0 * (1.0 + b) / (1.0 - a);
    cert.constants["theta"] = theta;
    cert.constants["xi"] = xi;
    cert.constants["a"] = a;
    cert.constants["b"] = b;
    cert.constants["zeta"] = zeta;
    cert.hypotheses.push_back(hyp("zeta_gt_2", zeta - 2.0));
  } else if (p == critical) {
    cert.hypotheses.push_back(Hypothesis{"p_subcritical", true, 0.0});
    cert.notes.push_back(
        "critical power p = 4/n: decay guaranteed for small data only");
  } else {
    cert.hypotheses.push_back(hyp("p_subcritical", critical - p));
    cert.notes.push_back("p > 4/n: H1 decay theorem inapplicable");
  }
  cert.notes.push_back(
      "H1 envelope constant is not quantified; certificate supports "
      "rate checks only");
  return cert;
}

Certificate certify_steering1(const CGLEParams& params,
                              const EigenSystem& eigsys) {
  if (params.p <= -1.0)
    throw std::invalid_argument("certify_steering1: requires p > -1");
  Certificate cert = certify_modal_l2(params, eigsys);
  cert.theorem = Theorem::Steering1;
  const double cp = std::abs(params.p) / (2.0 * std::sqrt(params.p + 1.0));
  cert.constants["c_p"] = cp;
  double margin;
  if (params.beta == 0.0)
    margin = params.kappa;  // no requirement beyond kappa > 0
  else if (cp == 0.0)
    margin = -std::numeric_limits<double>::infinity();
  else
    margin = params.kappa - std::abs(params.beta) / cp;
  cert.hypotheses.push_back(hyp("kappa_beta_ratio", margin));
  return cert;
}

Certificate certify_steering2(const CGLEParams& params,
                              const EigenSystem& eigsys) {
  if (!params.gamma_tilde)
    throw std::invalid_argument("certify_steering2: gamma_tilde required");
  Certificate cert = certify_steering1(params, eigsys);
  cert.theorem = Theorem::Steering2;
  const double lam1 = cert.constant("lambda_1");
  const double lam_next = cert.constant("lambda_next");
  const double gt = *params.gamma_tilde;
  const double stable_cap = params.lambda * lam1;
  if (gt >= stable_cap)
    throw std::invalid_argument(
        "certify_steering2: gamma_tilde must be below lambda * lambda_1");
  cert.hypotheses.push_back(hyp("gamma_tilde_window", stable_cap - gt));

  const double omega = cert.constant("omega");
  const double epsilon = params.epsilon.value_or(0.05 * omega);
  if (epsilon <= 0.0 || epsilon >= omega)
    throw std::invalid_argument(
        "certify_steering2: epsilon must lie in (0, omega)");
  const double threshold = params.gamma * lam1 / lam_next;
  const double omega_tilde = 2.0 * (gt - threshold);
  cert.steering_case = (gt > threshold) ? 1 : 2;
  cert.constants["omega_tilde"] = omega_tilde;
  cert.constants["epsilon"] = epsilon;
  cert.constants["coupling"] =
      (gt - params.gamma) * (gt - params.gamma) / epsilon;
  cert.constants["target_exponent"] = 2.0 * (stable_cap - gt);
  cert.notes.push_back(
      "shared epsilon couples the z-decay exponent (omega - epsilon) to the "
      "forcing factor 1/|omega_tilde - epsilon|");
  if (cert.steering_case == 1) {
    // Dropping the -1 from the Duhamel integral needs omega_tilde > epsilon.
    cert.hypotheses.push_back(
        hyp("epsilon_below_omega_tilde", omega_tilde - epsilon));
    cert.constants["exponent"] =
        std::min(omega - epsilon, 2.0 * (stable_cap - gt));
  } else {
    cert.constants["exponent"] = omega - epsilon;
  }
  return cert;
}

Certificate certify_nodal(const CGLEParams& params, double length) {
  params.validate(false);
  if (length <= 0.0)
    throw std::invalid_argument("certify_nodal: length must be positive");
  constexpr double kPi = 3.14159265358979323846;
  const double lam1 = (kPi / length) * (kPi / length);
  const double h = length / params.n_controllers;
  Certificate cert;
  cert.theorem = Theorem::Nodal;
  cert.hypotheses.push_back(kappa_positive(params));
  cert.hypotheses.push_back(
      hyp("lambda_ge_mu_h_sq", params.lambda - params.mu * h * h));
  cert.hypotheses.push_back(
      hyp("mu_quarter_gt_gamma", 0.25 * params.mu - params.gamma));
  const double rate = lam1 * (params.lambda - params.mu * h * h) +
                      (0.25 * params.mu - params.gamma);
  cert.constants["rate"] = rate;
  cert.constants["exponent"] = 2.0 * rate;
  cert.constants["lambda_1"] = lam1;
  return cert;
}

namespace detail {

double envelope_value(const Certificate& cert, const InitialNorms& init,
                      double t, bool corollary) {
  if (corollary && cert.theorem != Theorem::Steering2)
    throw std::invalid_argument(
        "corollary envelope exists only for steering2");
  switch (cert.theorem) {
    case Theorem::Volume:
    case Theorem::ModalL2:
      return init.u_l2_sq * std::exp(-cert.constant("exponent") * t);
    case Theorem::Nodal:
      return std::sqrt(init.u_l2_sq) * std::exp(-cert.constant("rate") * t);
    case Theorem::Steering1: {
      if (!init.z_l2_sq)
        throw std::invalid_argument("steering envelope needs ||z0||^2");
      return *init.z_l2_sq * std::exp(-cert.constant("omega") * t);
    }
    case Theorem::Steering2: {
      if (!init.z_l2_sq || !init.v_l2_sq)
        throw std::invalid_argument(
            "steering2 envelope needs ||z0||^2 and ||v0||^2");
      const double z0 = *init.z_l2_sq;
      const double v0 = *init.v_l2_sq;
      const double omega = cert.constant("omega");
      const double omega_tilde = cert.constant("omega_tilde");
      const double eps = cert.constant("epsilon");
      const double coupling = cert.constant("coupling");
      const double target_exp = cert.constant("target_exponent");
      const double z_term = z0 * std::exp(-(omega - eps) * t);
      if (cert.steering_case == 1) {
        const double forced =
            coupling * v0 / (omega_tilde - eps) * std::exp(-target_exp * t);
        if (!corollary) return z_term + forced;
        return z_term + v0 * (coupling / (omega_tilde - eps) + 1.0) *
                            std::exp(-target_exp * t);
      }
      const double forced =
          coupling * v0 / (eps - omega_tilde) * std::exp(-(omega - eps) * t);
      if (!corollary) return z_term + forced;
      return z_term + forced + v0 * std::exp(-target_exp * t);
    }
    case Theorem::ModalH1:
      throw std::invalid_argument(
          "modal_h1 envelope constant is unquantified; use rate checks");
  }
  throw std::logic_error("unknown theorem");
}

}  // namespace detail

double envelope_at(const Certificate& cert, const InitialNorms& init,
                   double t) {
  if (!cert.satisfied())
    throw std::invalid_argument("envelope_at: certificate not satisfied");
  return detail::envelope_value(cert, init, t, false);
}

double corollary_envelope_at(const Certificate& cert, const InitialNorms& init,
                             double t) {
  if (!cert.satisfied())
    throw std::invalid_argument(
        "corollary_envelope_at: certificate not satisfied");
  return detail::envelope_value(cert, init, t, true);
}

}  // namespace cgle
