#include "cgle/controllers.hpp"

#include <cmath>
#include <stdexcept>

namespace cgle {

namespace {

void require_interval(const DomainPtr& dom, const char* who) {
  if (!dom) throw std::invalid_argument(std::string(who) + ": no domain");
  if (dom->kind() != DomainKind::Interval)
    throw std::invalid_argument(std::string(who) + ": interval domain required");
}

void require_dirichlet_interval(const DomainPtr& dom, const char* who) {
  require_interval(dom, who);
  if (dom->bc() != BoundaryCondition::Dirichlet)
    throw std::invalid_argument(std::string(who) +
                                ": Dirichlet boundary required");
}

}  // namespace

std::vector<double> nodal_midpoints(int n, double length) {
  if (n < 1) throw std::invalid_argument("nodal_midpoints: n must be >= 1");
  std::vector<double> pts(n);
  const double h = length / n;
  for (int k = 0; k < n; ++k) pts[k] = (k + 0.5) * h;
  return pts;
}

Field volume_interpolant(const Field& u, int n) {
  require_interval(u.domain(), "volume_interpolant");
  if (n < 1) throw std::invalid_argument("volume_interpolant: N must be >= 1");
  const Domain& dom = *u.domain();
  const int m = dom.nodes_x();
  const bool dirichlet = dom.bc() == BoundaryCondition::Dirichlet;
  // Work on the closed grid 0..intervals; Dirichlet fields are implicitly
  // zero at the two boundary nodes.
  const int intervals = dirichlet ? m + 1 : m - 1;
  if (intervals % n != 0)
    throw std::invalid_argument(
        "volume_interpolant: cell edges must coincide with grid nodes");
  const int per = intervals / n;
  const double dx = dom.spacing_x();
  const double cell = dom.length(0) / n;

  auto closed_value = [&](int j) -> Complex {
    if (!dirichlet) return u.values()[j];
    if (j == 0 || j == m + 1) return Complex(0.0, 0.0);
    return u.values()[j - 1];
  };

  std::vector<Complex> means(n);
  for (int k = 0; k < n; ++k) {
    const int a = k * per;
    const int b = a + per;
    Complex acc = 0.5 * (closed_value(a) + closed_value(b));
    for (int j = a + 1; j < b; ++j) acc += closed_value(j);
    means[k] = acc * dx / cell;
  }

  // Scatter back to nodes; a node on the shared edge of two cells belongs to
  // the right cell (half-open J_k), the node at x = L to the last one.
  Eigen::VectorXcd out(m);
  for (int i = 0; i < m; ++i) {
    const int closed = dirichlet ? i + 1 : i;
    const int k = std::min(n - 1, closed / per);
    out[i] = means[k];
  }
  return Field(u.domain(), std::move(out));
}

Field apply_volume_controller(const Field& u, const CGLEParams& params) {
  Field ih = volume_interpolant(u, params.n_controllers);
  ih.values() *= -params.mu;
  return ih;
}

Field apply_modal_controller(const Field& u, const CGLEParams& params,
                             const EigenSystem& eigsys) {
  const DomainPtr& dom = u.domain();
  if (!dom || dom->bc() != BoundaryCondition::Dirichlet)
    throw std::invalid_argument("modal controller: Dirichlet domain required");
  if (eigsys.domain().get() != dom.get())
    throw std::invalid_argument("modal controller: eigensystem domain mismatch");
  const int n = params.n_controllers;
  if (eigsys.count() < n)
    throw std::invalid_argument("modal controller: eigensystem too small");
  ModalCoeffs mc = to_modal(u, n);
  mc.coeffs *= -params.mu;
  return from_modal(mc);
}

Field apply_nodal_controller(const Field& u, const CGLEParams& params,
                             const ControllerSpec& spec) {
  require_dirichlet_interval(u.domain(), "nodal controller");
  const Domain& dom = *u.domain();
  const int n = params.n_controllers;
  const double length = dom.length(0);
  const double h = length / n;
  const double dx = dom.spacing_x();
  const int m = dom.nodes_x();

  std::vector<double> act, obs;
  if (spec.points && !spec.points->actuation.empty()) {
    act = spec.points->actuation;
    obs = spec.points->observation.empty() ? act : spec.points->observation;
  } else {
    act = nodal_midpoints(n, length);
    obs = act;
  }
  if (static_cast<int>(act.size()) != n || static_cast<int>(obs.size()) != n)
    throw std::invalid_argument("nodal controller: need one point per cell");

  auto nearest = [&](double x, const char* what) -> int {
    const long j = std::lround(x / dx);  // grid nodes sit at j*dx, j=1..M
    if (j < 1 || j > m)
      throw std::invalid_argument(std::string("nodal controller: ") + what +
                                  " point collides with a boundary node");
    return static_cast<int>(j - 1);
  };

  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(m);
  for (int k = 0; k < n; ++k) {
    const double lo = k * h;
    const double hi = (k + 1) * h;
    if (act[k] < lo || act[k] >= hi || obs[k] < lo || obs[k] >= hi)
      throw std::invalid_argument(
          "nodal controller: point outside its cell J_k");
    const Complex reading = u.values()[nearest(obs[k], "observation")];
    out[nearest(act[k], "actuation")] += -params.mu * h * reading / dx;
  }
  return Field(u.domain(), std::move(out));
}

Field apply_steering_controller(const Field& u, const Field& v,
                                const CGLEParams& params,
                                const EigenSystem& eigsys) {
  if (u.domain().get() != v.domain().get())
    throw std::invalid_argument("steering controller: domain mismatch");
  Field z(u.domain(), u.values() - v.values());
  return apply_modal_controller(z, params, eigsys);
}

}  // namespace cgle
