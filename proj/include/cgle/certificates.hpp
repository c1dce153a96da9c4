// Machine-checked hypothesis certificates for the stabilization theorems.
// Each certify_* function substitutes the run parameters into the hypotheses
// of one theorem and reports a signed margin per hypothesis (positive means
// strictly satisfied, with room).  Failed hypotheses are reported, never
// thrown; exceptions are reserved for structurally invalid requests.  A
// satisfied certificate carries the decay constants needed to evaluate the
// predicted envelope at any time.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cgle/domain.hpp"
#include "cgle/params.hpp"

namespace cgle {

enum class Theorem { Volume, ModalL2, ModalH1, Steering1, Steering2, Nodal };

std::string theorem_name(Theorem t);

struct Hypothesis {
  std::string name;
  bool satisfied = false;
  double margin = 0.0;  // positive iff satisfied with that much room
};

// Norms at t = 0 used to anchor an envelope.
struct InitialNorms {
  double u_l2_sq = 0.0;
  double u_h1_semi_sq = 0.0;
  std::optional<double> z_l2_sq;
  std::optional<double> v_l2_sq;
};

struct Certificate {
  Theorem theorem = Theorem::ModalL2;
  std::vector<Hypothesis> hypotheses;
  // Named decay constants (see each certify_* for the keys).  "exponent" is
  // always the decay rate of the theorem's squared-norm envelope; for the
  // two-term Steering-II bound it is the slower of the two exponents.
  std::map<std::string, double> constants;
  std::vector<std::string> notes;
  int steering_case = 0;  // Steering2: 1 or 2

  bool satisfied() const;
  double constant(const std::string& key) const;  // throws on missing key
  const Hypothesis* find(const std::string& name) const;
};

// Volume-element law on an interval of length L (Neumann setting):
// requires kappa > 0, mu > 0 and 1/N^2 < min(1 - 4 gamma/mu, 4 lambda/(mu L^2)).
// Constants: nu = 1/2 - 2 gamma/mu - 1/(2 N^2), m = 2 lambda/mu - h^2/2,
// exponent = mu nu for ||u(t)||^2 <= exp(-mu nu t) ||u0||^2.
Certificate certify_volume(const CGLEParams& params, double length);

// Modal law, L2 decay: requires kappa > 0, mu >= gamma and
// lambda_{N+1} > gamma / lambda.  Constants: omega =
// 2 (lambda - gamma / lambda_{N+1}) lambda_1, exponent = omega.
Certificate certify_modal_l2(const CGLEParams& params,
                             const EigenSystem& eigsys);

// Modal law, H1 decay at a chosen rate delta in (0, omega).  Reports the
// interpolation exponents theta, xi, the Gronwall powers a, b and
// zeta = 2(1+b)/(1-a) > 2 for p < 4/n; flags the small-data branch at
// p = 4/n; reports the theorem inapplicable for p > 4/n.  The constant in
// front of the H1 envelope is not quantified by the theorem, so this
// certificate supports rate checks only.
Certificate certify_modal_h1(const CGLEParams& params,
                             const EigenSystem& eigsys, int dimension,
                             std::optional<double> delta = std::nullopt);

// Steering toward an arbitrary co-evolved solution: the modal-L2 hypotheses
// plus kappa >= |beta| / C_p with C_p = |p| / (2 sqrt(p+1)) (needs p > -1).
// Constants: omega as in modal L2; ||z(t)||^2 <= exp(-omega t) ||z0||^2.
Certificate certify_steering1(const CGLEParams& params,
                              const EigenSystem& eigsys);

// Steering toward a target evolved with gain gamma_tilde < lambda lambda_1
// (throws otherwise).  Case I: gamma_tilde above gamma lambda_1/lambda_{N+1};
// Case II: at or below.  Constants: omega, omega_tilde =
// 2 (gamma_tilde - gamma lambda_1 / lambda_{N+1}), epsilon (default
// 0.05 omega), coupling = |gamma_tilde - gamma|^2 / epsilon, target_exponent
// = 2 (lambda lambda_1 - gamma_tilde).  Case I additionally needs
// epsilon < omega_tilde for the displayed bound.
Certificate certify_steering2(const CGLEParams& params,
                              const EigenSystem& eigsys);

// Nodal law on a Dirichlet interval of length L with midpoint defaults:
// requires kappa > 0, lambda >= mu h^2 and mu/4 > gamma, h = L/N.
// Constants: rate = lambda_1 (lambda - mu h^2) + (mu/4 - gamma) for the
// unsquared norm ||u(t)|| <= exp(-rate t) ||u0||, exponent = 2 rate.
Certificate certify_nodal(const CGLEParams& params, double length);

// Evaluates the theorem's right-hand side at time t from the recorded
// initial norms.  Throws on an unsatisfied certificate and for ModalH1
// (whose envelope constant is unquantified).
double envelope_at(const Certificate& cert, const InitialNorms& init,
                   double t);

// Steering-II corollary bound on ||u(t)||^2 (the z- and v-envelopes
// combined as displayed in the source theorem).
double corollary_envelope_at(const Certificate& cert, const InitialNorms& init,
                             double t);

namespace detail {
// Formula evaluation without the satisfaction gate; the CLI uses this to
// demonstrate envelope violations under --force.
double envelope_value(const Certificate& cert, const InitialNorms& init,
                      double t, bool corollary);
}  // namespace detail

}  // namespace cgle
