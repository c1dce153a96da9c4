// The four finite-parameter feedback laws.  Each apply_* function returns the
// control contribution as a grid field, so the right-hand side assembly can
// treat every controller uniformly.  The gain mu and the parameter count N
// come from CGLEParams.

#pragma once

#include <optional>
#include <vector>

#include "cgle/domain.hpp"
#include "cgle/params.hpp"

namespace cgle {

enum class ControllerKind { None, VolumeElements, Modal, Nodal, Steering };

// Steering either tracks an arbitrary co-evolved solution (same gain gamma)
// or a target evolved with the smaller gain gamma_tilde from the params.
enum class SteeringTarget { AnySolution, StableTarget };

// Actuation points x_k and observation points xbar_k for the nodal law, one
// pair per cell J_k = [(k-1)L/N, kL/N).  Empty vectors mean cell midpoints.
struct NodalPoints {
  std::vector<double> actuation;
  std::vector<double> observation;
};

struct ControllerSpec {
  ControllerKind kind = ControllerKind::None;
  std::optional<NodalPoints> points;  // nodal only
  SteeringTarget target = SteeringTarget::AnySolution;
};

// Midpoints (k - 1/2) L/N, the default placement for the nodal law.
std::vector<double> nodal_midpoints(int n, double length);

// Piecewise-constant interpolant: cell means over J_k, k = 1..N, computed by
// the composite trapezoid rule over each cell divided by |J_k|.  Interval
// domains only; every cell edge must land on a grid node.
Field volume_interpolant(const Field& u, int n);

// -mu * I_h(u)
Field apply_volume_controller(const Field& u, const CGLEParams& params);

// -mu * sum_{k<=N} (u, w_k) w_k on a Dirichlet domain.
Field apply_modal_controller(const Field& u, const CGLEParams& params,
                             const EigenSystem& eigsys);

// Collocated spikes: -mu * h * u(xbar_k) / dx at the grid node nearest x_k
// (ties resolve to the larger index).  Dirichlet intervals only.  Its
// quadrature pairing with any v equals -mu h sum_k u(xbar_k) conj(v(x_k)).
Field apply_nodal_controller(const Field& u, const CGLEParams& params,
                             const ControllerSpec& spec);

// -mu * P_N (u - v): the modal law acting on the deviation from the target.
Field apply_steering_controller(const Field& u, const Field& v,
                                const CGLEParams& params,
                                const EigenSystem& eigsys);

}  // namespace cgle
