// Post-processing of trajectory records: decay-rate fits on log-norm series,
// sample-by-sample comparison against certificate envelopes, and the
// interpolant inequality margin backing the volume-element estimate.

#pragma once

#include <optional>
#include <vector>

#include "cgle/certificates.hpp"
#include "cgle/domain.hpp"
#include "cgle/dynamics.hpp"

namespace cgle {

struct DecayFit {
  double rate = 0.0;          // negated slope of the log-value fit
  double intercept = 0.0;     // fitted log value at t = 0
  double residual_rms = 0.0;  // RMS misfit of the regression, in log units
  double t_begin = 0.0;
  double t_end = 0.0;
  int n_used = 0;
};

// Least-squares fit of log(value) against t over the trailing
// window_fraction of the samples.  Values at or below the 1e-12 floor are
// dropped; fewer than 8 usable samples is an error.
DecayFit fit_decay_rate(const std::vector<double>& times,
                        const std::vector<double>& values,
                        double window_fraction = 0.5);

// Column extractors for fit_decay_rate.
std::vector<double> sample_times(const TrajectoryRecord& rec);
std::vector<double> series_l2_sq(const TrajectoryRecord& rec);
std::vector<double> series_h1_semi_sq(const TrajectoryRecord& rec);
std::vector<double> series_z_l2_sq(const TrajectoryRecord& rec);

enum class EnvelopeKind { Theorem, Corollary };

struct EnvelopeReport {
  bool pass = false;
  double worst_ratio = 0.0;  // max over samples of quantity / envelope
  std::optional<double> first_violation;
  int n_checked = 0;
};

// Default multiplicative slack for envelope checks: round-off plus the
// second-order time-integration budget.
double envelope_slack(double dt);

// Checks the theorem's bounded quantity (||u||^2, ||z||^2, or ||u|| for the
// nodal law; the Corollary kind checks ||u||^2 for Steering II) at every
// sample: quantity <= envelope * (1 + rel_slack).  Requires a satisfied
// certificate whose theorem matches the record's controller; `force` skips
// the satisfaction gate so failed hypotheses can be demonstrated.
EnvelopeReport verify_envelope(const TrajectoryRecord& rec,
                               const Certificate& cert, double rel_slack,
                               EnvelopeKind kind = EnvelopeKind::Theorem,
                               bool force = false);

// h ||u||_{H1,equiv} - ||u - I_h u||_{L2} with h = L/N; the volume-element
// estimate needs this to be nonnegative for fields along the trajectory.
double interpolant_margin(const Field& u, int n);

}  // namespace cgle
