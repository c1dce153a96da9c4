// Coefficients of the controlled complex Ginzburg-Landau equation
//
//   u_t = (lambda + i alpha) Lap u - (kappa + i beta) |u|^p u + gamma u + control
//
// All certificate formulas and the time stepper read from this one struct.

#pragma once

#include <optional>
#include <stdexcept>

namespace cgle {

struct CGLEParams {
  double lambda = 1.0;  // diffusion, must be > 0
  double alpha = 0.0;   // dispersion
  double kappa = 0.0;   // nonlinear damping, >= 0 (0 only in linear-oracle use)
  double beta = 0.0;    // nonlinear frequency shift
  double gamma = 0.0;   // linear gain
  double p = 2.0;       // nonlinearity power
  double mu = 0.0;      // feedback gain, >= 0
  int n_controllers = 1;  // N: number of feedback parameters, >= 1

  // Steering toward a stable target: gain of the target system and the
  // Young-inequality split used by the two-term envelope.
  std::optional<double> gamma_tilde;
  std::optional<double> epsilon;

  // Structural checks shared by simulation and certification.  p > 0 is a
  // simulation requirement; certificates relax it where the theory allows.
  void validate(bool simulation = true) const {
    if (lambda <= 0.0) throw std::invalid_argument("lambda must be positive");
    if (kappa < 0.0) throw std::invalid_argument("kappa must be nonnegative");
    if (mu < 0.0) throw std::invalid_argument("mu must be nonnegative");
    if (n_controllers < 1)
      throw std::invalid_argument("n_controllers must be at least 1");
    if (simulation && p <= 0.0)
      throw std::invalid_argument("nonlinearity power p must be positive");
  }
};

}  // namespace cgle
