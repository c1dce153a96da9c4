#include "cgle/analysis.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "cgle/controllers.hpp"

namespace cgle {

namespace {

constexpr double kValueFloor = 1e-12;

bool variant_matches(Theorem theorem, ControllerKind kind) {
  switch (theorem) {
    case Theorem::Volume: return kind == ControllerKind::VolumeElements;
    case Theorem::ModalL2:
    case Theorem::ModalH1: return kind == ControllerKind::Modal;
    case Theorem::Steering1:
    case Theorem::Steering2: return kind == ControllerKind::Steering;
    case Theorem::Nodal: return kind == ControllerKind::Nodal;
  }
  return false;
}

}  // namespace

DecayFit fit_decay_rate(const std::vector<double>& times,
                        const std::vector<double>& values,
                        double window_fraction) {
  if (times.size() != values.size())
    throw std::invalid_argument("fit_decay_rate: series length mismatch");
  if (window_fraction <= 0.0 || window_fraction > 1.0)
    throw std::invalid_argument(
        "fit_decay_rate: window_fraction must be in (0, 1]");
  const size_t n = times.size();
  const size_t window =
      std::min(n, static_cast<size_t>(std::ceil(window_fraction * n)));
  const size_t begin = n - window;

  std::vector<double> t, logv;
  for (size_t i = begin; i < n; ++i) {
    if (values[i] > kValueFloor) {
      t.push_back(times[i]);
      logv.push_back(std::log(values[i]));
    }
  }
  if (t.size() < 8)
    throw std::invalid_argument(
        "fit_decay_rate: fewer than 8 usable samples in the window");

  const size_t m = t.size();
  double st = 0.0, sy = 0.0;
  for (size_t i = 0; i < m; ++i) {
    st += t[i];
    sy += logv[i];
  }
  const double tbar = st / m;
  const double ybar = sy / m;
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < m; ++i) {
    sxx += (t[i] - tbar) * (t[i] - tbar);
    sxy += (t[i] - tbar) * (logv[i] - ybar);
  }
  if (sxx == 0.0)
    throw std::invalid_argument("fit_decay_rate: degenerate time axis");
  const double slope = sxy / sxx;

  DecayFit fit;
  fit.rate = -slope;
  fit.intercept = ybar - slope * tbar;
  fit.t_begin = t.front();
  fit.t_end = t.back();
  fit.n_used = static_cast<int>(m);
  double ss = 0.0;
  for (size_t i = 0; i < m; ++i) {
    const double resid = logv[i] - (fit.intercept + slope * t[i]);
    ss += resid * resid;
  }
  fit.residual_rms = std::sqrt(ss / m);
  return fit;
}

std::vector<double> sample_times(const TrajectoryRecord& rec) {
  std::vector<double> out;
  out.reserve(rec.samples.size());
  for (const auto& s : rec.samples) out.push_back(s.t);
  return out;
}

std::vector<double> series_l2_sq(const TrajectoryRecord& rec) {
  std::vector<double> out;
  out.reserve(rec.samples.size());
  for (const auto& s : rec.samples) out.push_back(s.l2_sq);
  return out;
}

std::vector<double> series_h1_semi_sq(const TrajectoryRecord& rec) {
  std::vector<double> out;
  out.reserve(rec.samples.size());
  for (const auto& s : rec.samples) out.push_back(s.h1_semi_sq);
  return out;
}

std::vector<double> series_z_l2_sq(const TrajectoryRecord& rec) {
  std::vector<double> out;
  out.reserve(rec.samples.size());
  for (const auto& s : rec.samples) {
    if (!s.z_l2_sq)
      throw std::invalid_argument("record carries no steering deviation");
    out.push_back(*s.z_l2_sq);
  }
  return out;
}

double envelope_slack(double dt) { return 1e-6 + 10.0 * dt * dt; }

EnvelopeReport verify_envelope(const TrajectoryRecord& rec,
                               const Certificate& cert, double rel_slack,
                               EnvelopeKind kind, bool force) {
  if (!force && !cert.satisfied())
    throw std::invalid_argument("verify_envelope: certificate not satisfied");
  if (!variant_matches(cert.theorem, rec.controller.kind))
    throw std::invalid_argument(
        "verify_envelope: certificate does not match the record's controller");
  if (cert.theorem == Theorem::ModalH1)
    throw std::invalid_argument(
        "verify_envelope: modal_h1 supports rate checks only");
  if (kind == EnvelopeKind::Corollary && cert.theorem != Theorem::Steering2)
    throw std::invalid_argument(
        "verify_envelope: corollary check applies to steering2 only");
  if (rec.samples.empty())
    throw std::invalid_argument("verify_envelope: empty record");

  const TrajectorySample& first = rec.samples.front();
  InitialNorms init;
  init.u_l2_sq = first.l2_sq;
  init.u_h1_semi_sq = first.h1_semi_sq;
  init.z_l2_sq = first.z_l2_sq;
  init.v_l2_sq = first.v_l2_sq;

  const bool steering = cert.theorem == Theorem::Steering1 ||
                        cert.theorem == Theorem::Steering2;
  EnvelopeReport report;
  report.pass = true;
  for (const auto& s : rec.samples) {
    double quantity;
    if (kind == EnvelopeKind::Corollary) {
      quantity = s.l2_sq;
    } else if (steering) {
      if (!s.z_l2_sq)
        throw std::invalid_argument(
            "verify_envelope: record carries no steering deviation");
      quantity = *s.z_l2_sq;
    } else if (cert.theorem == Theorem::Nodal) {
      quantity = std::sqrt(s.l2_sq);
    } else {
      quantity = s.l2_sq;
    }
    const double env =
        detail::envelope_value(cert, init, s.t, kind == EnvelopeKind::Corollary);
    double ratio;
    if (env > 0.0)
      ratio = quantity / env;
    else
      ratio = (quantity == 0.0) ? 0.0
                                : std::numeric_limits<double>::infinity();
    report.worst_ratio = std::max(report.worst_ratio, ratio);
    if (quantity > env * (1.0 + rel_slack)) {
      report.pass = false;
      if (!report.first_violation) report.first_violation = s.t;
    }
    ++report.n_checked;
  }
  return report;
}

double interpolant_margin(const Field& u, int n) {
  Field ih = volume_interpolant(u, n);
  const Eigen::VectorXd& w = u.domain()->quadrature_weights();
  double diff_sq = 0.0;
  for (int i = 0; i < u.size(); ++i)
    diff_sq += w[i] * std::norm(u.values()[i] - ih.values()[i]);
  const Norms norms = compute_norms(u, 0.0);
  const double h = u.domain()->length(0) / n;
  return h * std::sqrt(norms.h1_equiv_sq) - std::sqrt(diff_sq);
}

}  // namespace cgle
