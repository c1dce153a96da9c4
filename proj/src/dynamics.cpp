#include "cgle/dynamics.hpp"

#include <cmath>
#include <random>

namespace cgle {

namespace {

// |w|^p w with the removable singularity at w = 0 closed by zero.
Eigen::VectorXcd power_nonlinearity(const Eigen::VectorXcd& w, double p) {
  Eigen::VectorXcd out(w.size());
  for (int i = 0; i < w.size(); ++i) {
    const double a2 = std::norm(w[i]);
    out[i] = (a2 == 0.0) ? Complex(0.0, 0.0) : std::pow(a2, 0.5 * p) * w[i];
  }
  return out;
}

// Modal projection onto the first n ordered modes, as a grid field.
Eigen::VectorXcd project_low_modes(const Domain& dom,
                                   const Eigen::VectorXcd& grid, int n) {
  Eigen::MatrixXcd c = dom.to_spectral(grid);
  Eigen::MatrixXcd kept = Eigen::MatrixXcd::Zero(c.rows(), c.cols());
  const auto& order = dom.ordered_modes();
  for (int k = 0; k < n; ++k) {
    const EigenPair& ep = order[k];
    const int iy = (ep.ky > 0) ? ep.ky - 1 : 0;
    kept(ep.kx - 1, iy) = c(ep.kx - 1, iy);
  }
  return dom.to_grid(kept);
}

// Integrating-factor Heun for one component:
//   c* = E (c + dt g1),  c' = E c + dt/2 (E g1 + g2)
// with E the exact diagonal propagator and g evaluated in physical space.
class Stepper {
 public:
  Stepper(DomainPtr domain, const CGLEParams& params,
          const ControllerSpec& spec, double dt, ControlStepping stepping,
          bool with_target)
      : dom_(std::move(domain)),
        params_(params),
        spec_(spec),
        dt_(dt),
        with_target_(with_target) {
    const bool diagonal_law = spec.kind == ControllerKind::Modal ||
                              spec.kind == ControllerKind::Steering;
    absorb_ = diagonal_law && stepping == ControlStepping::ExactDiagonal;
    explicit_control_ = spec.kind == ControllerKind::VolumeElements ||
                        spec.kind == ControllerKind::Nodal ||
                        (diagonal_law && !absorb_);
    if (spec.kind == ControllerKind::Modal ||
        spec.kind == ControllerKind::Steering)
      eigsys_ = eigen_system(dom_, params.n_controllers);

    const Complex diffusion(params.lambda, params.alpha);
    const auto& order = dom_->ordered_modes();
    prop_u_ = Eigen::MatrixXcd(dom_->modes_x(), dom_->modes_y());
    for (int iy = 0; iy < prop_u_.cols(); ++iy)
      for (int ix = 0; ix < prop_u_.rows(); ++ix) {
        const double lam = dom_->axis_lambda_x(ix) + dom_->axis_lambda_y(iy);
        prop_u_(ix, iy) = std::exp((params.gamma - diffusion * lam) * dt);
      }
    if (absorb_) {
      // Fold -mu onto the controlled modes; exact since the law is diagonal.
      for (int k = 0; k < params.n_controllers; ++k) {
        const EigenPair& ep = order[k];
        const int iy = (ep.ky > 0) ? ep.ky - 1 : 0;
        prop_u_(ep.kx - 1, iy) *= std::exp(-params.mu * dt);
      }
    }
    if (with_target_) {
      const double gv = (spec.target == SteeringTarget::StableTarget)
                            ? params.gamma_tilde.value()
                            : params.gamma;
      prop_v_ = Eigen::MatrixXcd(dom_->modes_x(), dom_->modes_y());
      for (int iy = 0; iy < prop_v_.cols(); ++iy)
        for (int ix = 0; ix < prop_v_.rows(); ++ix) {
          const double lam = dom_->axis_lambda_x(ix) + dom_->axis_lambda_y(iy);
          prop_v_(ix, iy) = std::exp((gv - diffusion * lam) * dt);
        }
    }
  }

  void advance(Eigen::VectorXcd& u, Eigen::VectorXcd* v) const {
    const Eigen::MatrixXcd cu = dom_->to_spectral(u);
    const Eigen::MatrixXcd g1 = dom_->to_spectral(forcing(u, v));
    Eigen::MatrixXcd cv, gv1;
    Eigen::VectorXcd v_pred;
    if (with_target_) {
      cv = dom_->to_spectral(*v);
      gv1 = dom_->to_spectral(target_forcing(*v));
      v_pred = dom_->to_grid((prop_v_.array() * (cv + dt_ * gv1).array()).matrix());
    }
    const Eigen::VectorXcd u_pred =
        dom_->to_grid((prop_u_.array() * (cu + dt_ * g1).array()).matrix());
    const Eigen::MatrixXcd g2 =
        dom_->to_spectral(forcing(u_pred, with_target_ ? &v_pred : nullptr));
    u = dom_->to_grid((prop_u_.array() * (cu + 0.5 * dt_ * g1).array() +
                       0.5 * dt_ * g2.array())
                          .matrix());
    if (with_target_) {
      const Eigen::MatrixXcd gv2 = dom_->to_spectral(target_forcing(v_pred));
      *v = dom_->to_grid((prop_v_.array() * (cv + 0.5 * dt_ * gv1).array() +
                          0.5 * dt_ * gv2.array())
                             .matrix());
    }
  }

 private:
  // Heun-stage forcing for u: nonlinearity plus whatever control is not in
  // the propagator.  With the steering law absorbed, the cross term
  // +mu P_N v stays explicit.
  Eigen::VectorXcd forcing(const Eigen::VectorXcd& u,
                           const Eigen::VectorXcd* v) const {
    const Complex strength(params_.kappa, params_.beta);
    Eigen::VectorXcd g = -strength * power_nonlinearity(u, params_.p);
    if (explicit_control_) {
      Field uf(dom_, u);
      switch (spec_.kind) {
        case ControllerKind::VolumeElements:
          g += apply_volume_controller(uf, params_).values();
          break;
        case ControllerKind::Nodal:
          g += apply_nodal_controller(uf, params_, spec_).values();
          break;
        case ControllerKind::Modal:
          g += apply_modal_controller(uf, params_, eigsys_).values();
          break;
        case ControllerKind::Steering: {
          Field vf(dom_, *v);
          g += apply_steering_controller(uf, vf, params_, eigsys_).values();
          break;
        }
        default:
          break;
      }
    } else if (absorb_ && spec_.kind == ControllerKind::Steering) {
      g += params_.mu * project_low_modes(*dom_, *v, params_.n_controllers);
    }
    return g;
  }

  Eigen::VectorXcd target_forcing(const Eigen::VectorXcd& v) const {
    const Complex strength(params_.kappa, params_.beta);
    return -strength * power_nonlinearity(v, params_.p);
  }

  DomainPtr dom_;
  CGLEParams params_;
  ControllerSpec spec_;
  double dt_;
  bool with_target_;
  bool absorb_ = false;
  bool explicit_control_ = false;
  EigenSystem eigsys_;
  Eigen::MatrixXcd prop_u_, prop_v_;
};

void check_finite(const Eigen::VectorXcd& u, double guard, double t,
                  const TrajectoryRecord& partial) {
  double peak = 0.0;
  bool finite = true;
  for (int i = 0; i < u.size(); ++i) {
    const double a = std::abs(u[i]);
    if (!std::isfinite(a)) {
      finite = false;
      break;
    }
    peak = std::max(peak, a);
  }
  if (!finite || peak > guard) throw SimulationDiverged(t, partial);
}

}  // namespace

double default_dt(const CGLEParams& params, const Field& u0) {
  double peak = 0.0;
  for (int i = 0; i < u0.size(); ++i)
    peak = std::max(peak, std::abs(u0.values()[i]));
  const double scale = std::abs(params.gamma) + params.mu +
                       params.kappa * std::pow(peak, params.p);
  return (scale > 0.0) ? std::min(1e-3, 0.1 / scale) : 1e-3;
}

Field assemble_rhs(const Field& u, const CGLEParams& params,
                   const Field* control) {
  params.validate();
  Field lap = laplacian_apply(u);
  const Complex diffusion(params.lambda, params.alpha);
  const Complex strength(params.kappa, params.beta);
  Eigen::VectorXcd rhs = diffusion * lap.values() -
                         strength * power_nonlinearity(u.values(), params.p) +
                         params.gamma * u.values();
  if (control) {
    if (control->domain().get() != u.domain().get())
      throw std::invalid_argument("assemble_rhs: control domain mismatch");
    rhs += control->values();
  }
  return Field(u.domain(), std::move(rhs));
}

Field step(const Field& u, const CGLEParams& params,
           const ControllerSpec& controller, double dt,
           ControlStepping stepping) {
  params.validate(params.kappa > 0.0);
  if (dt <= 0.0) throw std::invalid_argument("step: dt must be positive");
  if (controller.kind == ControllerKind::Steering)
    throw std::invalid_argument(
        "step: steering co-evolves a target; use simulate");
  Stepper stepper(u.domain(), params, controller, dt, stepping, false);
  Eigen::VectorXcd values = u.values();
  stepper.advance(values, nullptr);
  return Field(u.domain(), std::move(values));
}

TrajectoryRecord simulate(const Field& u0, const CGLEParams& params,
                          const ControllerSpec& controller,
                          const SimulateOptions& options,
                          const std::optional<Field>& v0) {
  params.validate(params.kappa > 0.0);
  if (options.t_final <= 0.0)
    throw std::invalid_argument("simulate: t_final must be positive");
  const bool steering = controller.kind == ControllerKind::Steering;
  if (steering && !v0)
    throw std::invalid_argument("simulate: steering requires a target state");
  if (steering && controller.target == SteeringTarget::StableTarget &&
      !params.gamma_tilde)
    throw std::invalid_argument(
        "simulate: stable-target steering requires gamma_tilde");
  if (v0 && v0->domain().get() != u0.domain().get())
    throw std::invalid_argument("simulate: target domain mismatch");

  const double dt = options.dt > 0.0 ? options.dt : default_dt(params, u0);
  const double sample_every =
      options.sample_every > 0.0 ? options.sample_every : dt;
  const long n_steps = std::llround(options.t_final / dt);
  const long stride = std::max(1L, std::lround(sample_every / dt));

  TrajectoryRecord rec;
  rec.params = params;
  rec.controller = controller;
  rec.dt = dt;
  rec.sample_every = stride * dt;

  Eigen::VectorXcd u = u0.values();
  Eigen::VectorXcd v;
  if (steering) v = v0->values();
  const Domain& dom = *u0.domain();
  const Eigen::VectorXd& w = dom.quadrature_weights();

  auto record_sample = [&](double t) {
    Norms n = compute_norms(Field(u0.domain(), u), params.p);
    TrajectorySample s;
    s.t = t;
    s.l2_sq = n.l2_sq;
    s.h1_semi_sq = n.h1_semi_sq;
    s.lpp = n.lpp;
    if (steering) {
      double z2 = 0.0, v2 = 0.0;
      for (int i = 0; i < u.size(); ++i) {
        z2 += w[i] * std::norm(u[i] - v[i]);
        v2 += w[i] * std::norm(v[i]);
      }
      s.z_l2_sq = z2;
      s.v_l2_sq = v2;
    }
    rec.samples.push_back(s);
  };

  record_sample(0.0);
  Stepper stepper(u0.domain(), params, controller, dt, options.stepping,
                  steering);
  for (long i = 1; i <= n_steps; ++i) {
    stepper.advance(u, steering ? &v : nullptr);
    const double t = i * dt;
    check_finite(u, options.amplitude_guard, t, rec);
    if (i % stride == 0) record_sample(t);
  }
  rec.final_state = Field(u0.domain(), std::move(u));
  if (steering) rec.final_target = Field(u0.domain(), std::move(v));
  return rec;
}

ModalCoeffs linear_modal_exact(const ModalCoeffs& c0, const CGLEParams& params,
                               double t) {
  if (params.kappa != 0.0)
    throw std::invalid_argument("linear_modal_exact: requires kappa = 0");
  if (!c0.domain) throw std::invalid_argument("linear_modal_exact: no domain");
  const auto& order = c0.domain->ordered_modes();
  ModalCoeffs out{c0.domain, c0.coeffs};
  for (int k = 0; k < out.count(); ++k) {
    const double lam = order[k].lambda;
    const double damping = (k < params.n_controllers) ? params.mu : 0.0;
    const double growth = (params.gamma - params.lambda * lam - damping) * t;
    out.coeffs[k] *= std::exp(Complex(growth, -params.alpha * lam * t));
  }
  return out;
}

Field initial_single_mode(const DomainPtr& domain, int mode_index,
                          Complex amplitude) {
  if (!domain) throw std::invalid_argument("initial_single_mode: null domain");
  if (mode_index < 1 || mode_index > domain->max_modes())
    throw std::invalid_argument("initial_single_mode: mode out of range");
  ModalCoeffs mc{domain, Eigen::VectorXcd::Zero(mode_index)};
  mc.coeffs[mode_index - 1] = amplitude;
  return from_modal(mc);
}

Field initial_random_smooth(const DomainPtr& domain, unsigned long long seed,
                            double decay, double amplitude) {
  if (!domain) throw std::invalid_argument("initial_random_smooth: null domain");
  std::mt19937_64 rng(seed);
  const int modes = domain->max_modes();
  ModalCoeffs mc{domain, Eigen::VectorXcd(modes)};
  constexpr double kTwoPi = 6.28318530717958647692;
  for (int k = 0; k < modes; ++k) {
    // Top 53 bits -> uniform double in [0, 1); avoids the
    // implementation-defined std::uniform_real_distribution.
    const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    const double phase = kTwoPi * unit;
    const double mag = amplitude * std::pow(static_cast<double>(k + 1), -decay);
    mc.coeffs[k] = mag * Complex(std::cos(phase), std::sin(phase));
  }
  return from_modal(mc);
}

Field initial_constant(const DomainPtr& domain, Complex value) {
  if (!domain) throw std::invalid_argument("initial_constant: null domain");
  return Field(domain,
               Eigen::VectorXcd::Constant(domain->node_count(), value));
}

}  // namespace cgle
