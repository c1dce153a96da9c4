#include "cgle/domain.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cgle {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Per-axis tables.  Dirichlet grids hold the M interior nodes j*L/(M+1) and
// use the rectangle rule (constant weight L/(M+1)); together with the sine
// basis this makes the discrete Gram matrix the identity up to round-off
// (DST-I orthogonality).  Neumann grids include both endpoints and use the
// trapezoid rule, which plays the same role for the cosine basis.  Both keep
// M-1 modes: the top (Nyquist) mode is dropped so one truncation contract
// covers both boundary conditions.
struct AxisTables {
  std::vector<double> nodes;
  Eigen::VectorXd weights;
  Eigen::MatrixXd basis;   // nodes x modes
  Eigen::VectorXd lambda;  // modes
};

AxisTables dirichlet_axis(double length, int m) {
  AxisTables ax;
  const double dx = length / (m + 1);
  ax.nodes.resize(m);
  for (int j = 0; j < m; ++j) ax.nodes[j] = (j + 1) * dx;
  ax.weights = Eigen::VectorXd::Constant(m, dx);
  const int modes = m - 1;
  ax.basis.resize(m, modes);
  ax.lambda.resize(modes);
  const double scale = std::sqrt(2.0 / length);
  for (int k = 0; k < modes; ++k) {
    const double wave = (k + 1) * kPi / length;
    ax.lambda[k] = wave * wave;
    for (int j = 0; j < m; ++j)
      ax.basis(j, k) = scale * std::sin(wave * ax.nodes[j]);
  }
  return ax;
}

AxisTables neumann_axis(double length, int m) {
  AxisTables ax;
  const double dx = length / (m - 1);
  ax.nodes.resize(m);
  for (int j = 0; j < m; ++j) ax.nodes[j] = j * dx;
  ax.weights = Eigen::VectorXd::Constant(m, dx);
  ax.weights[0] = 0.5 * dx;
  ax.weights[m - 1] = 0.5 * dx;
  const int modes = m - 1;
  ax.basis.resize(m, modes);
  ax.lambda.resize(modes);
  const double c0 = std::sqrt(1.0 / length);
  const double ck = std::sqrt(2.0 / length);
  for (int k = 0; k < modes; ++k) {
    const double wave = k * kPi / length;
    ax.lambda[k] = wave * wave;
    for (int j = 0; j < m; ++j)
      ax.basis(j, k) = (k == 0) ? c0 : ck * std::cos(wave * ax.nodes[j]);
  }
  return ax;
}

AxisTables trivial_axis() {
  AxisTables ax;
  ax.nodes = {0.0};
  ax.weights = Eigen::VectorXd::Ones(1);
  ax.basis = Eigen::MatrixXd::Ones(1, 1);
  ax.lambda = Eigen::VectorXd::Zero(1);
  return ax;
}

}  // namespace

Domain::Domain(const DomainSpec& spec) : spec_(spec) {
  if (spec.lengths[0] <= 0.0 ||
      (spec.kind == DomainKind::Rectangle && spec.lengths[1] <= 0.0))
    throw std::invalid_argument("domain lengths must be positive");
  if (spec.grid_points < 16)
    throw std::invalid_argument("grid resolution must be at least 16");
  if (spec.kind == DomainKind::Rectangle &&
      spec.bc != BoundaryCondition::Dirichlet)
    throw std::invalid_argument("rectangle domains are Dirichlet-only");

  const int m = spec.grid_points;
  AxisTables ax = (spec.bc == BoundaryCondition::Dirichlet)
                      ? dirichlet_axis(spec.lengths[0], m)
                      : neumann_axis(spec.lengths[0], m);
  AxisTables ay = (spec.kind == DomainKind::Rectangle)
                      ? dirichlet_axis(spec.lengths[1], m)
                      : trivial_axis();
  dx_ = (spec.bc == BoundaryCondition::Dirichlet)
            ? spec.lengths[0] / (m + 1)
            : spec.lengths[0] / (m - 1);

  nodes_x_ = std::move(ax.nodes);
  nodes_y_ = std::move(ay.nodes);
  wx_ = std::move(ax.weights);
  wy_ = std::move(ay.weights);
  basis_x_ = std::move(ax.basis);
  basis_y_ = std::move(ay.basis);
  lambda_x_ = std::move(ax.lambda);
  lambda_y_ = std::move(ay.lambda);

  const int mx = static_cast<int>(nodes_x_.size());
  const int my = static_cast<int>(nodes_y_.size());
  weights_flat_.resize(mx * my);
  for (int j = 0; j < my; ++j)
    for (int i = 0; i < mx; ++i) weights_flat_[i + j * mx] = wx_[i] * wy_[j];

  const bool interval = spec.kind == DomainKind::Interval;
  ordered_.reserve(lambda_x_.size() * (interval ? 1 : lambda_y_.size()));
  for (int ix = 0; ix < lambda_x_.size(); ++ix) {
    if (interval) {
      ordered_.push_back({lambda_x_[ix], ix + 1, 0});
    } else {
      for (int iy = 0; iy < lambda_y_.size(); ++iy)
        ordered_.push_back({lambda_x_[ix] + lambda_y_[iy], ix + 1, iy + 1});
    }
  }
  std::sort(ordered_.begin(), ordered_.end(),
            [](const EigenPair& a, const EigenPair& b) {
              if (a.lambda != b.lambda) return a.lambda < b.lambda;
              if (a.kx != b.kx) return a.kx < b.kx;
              return a.ky < b.ky;
            });
}

Eigen::MatrixXcd Domain::to_spectral(const Eigen::VectorXcd& grid) const {
  const int mx = nodes_x();
  const int my = nodes_y();
  if (grid.size() != mx * my)
    throw std::invalid_argument("grid vector does not match domain");
  Eigen::Map<const Eigen::MatrixXcd> f(grid.data(), mx, my);
  Eigen::MatrixXcd weighted =
      wx_.asDiagonal() * f * wy_.asDiagonal();
  return basis_x_.transpose() * weighted * basis_y_;
}

Eigen::VectorXcd Domain::to_grid(const Eigen::MatrixXcd& coeffs) const {
  if (coeffs.rows() != modes_x() || coeffs.cols() != modes_y())
    throw std::invalid_argument("coefficient matrix does not match domain");
  Eigen::MatrixXcd f = basis_x_ * coeffs * basis_y_.transpose();
  return Eigen::Map<Eigen::VectorXcd>(f.data(), f.size());
}

Eigen::VectorXd Domain::eigenfunction_values(int ordered_index) const {
  if (ordered_index < 0 || ordered_index >= max_modes())
    throw std::invalid_argument("eigenfunction index out of range");
  const EigenPair& ep = ordered_[ordered_index];
  const int mx = nodes_x();
  const int my = nodes_y();
  Eigen::VectorXd out(mx * my);
  const int iy = (ep.ky > 0) ? ep.ky - 1 : 0;
  for (int j = 0; j < my; ++j)
    for (int i = 0; i < mx; ++i)
      out[i + j * mx] = basis_x_(i, ep.kx - 1) * basis_y_(j, iy);
  return out;
}

DomainPtr build_domain(const DomainSpec& spec) {
  return std::make_shared<const Domain>(spec);
}

Field::Field(DomainPtr domain, Eigen::VectorXcd values)
    : domain_(std::move(domain)), values_(std::move(values)) {
  if (!domain_) throw std::invalid_argument("field requires a domain");
  if (values_.size() != domain_->node_count())
    throw std::invalid_argument("field values do not match domain grid");
}

EigenSystem eigen_system(const DomainPtr& domain, int count) {
  if (!domain) throw std::invalid_argument("eigen_system: null domain");
  if (count < 1 || count > domain->max_modes())
    throw std::invalid_argument(
        "eigen_system: mode count exceeds representable band");
  const auto& all = domain->ordered_modes();
  return EigenSystem(domain,
                     std::vector<EigenPair>(all.begin(), all.begin() + count));
}

ModalCoeffs to_modal(const Field& f, int truncation) {
  const DomainPtr& dom = f.domain();
  if (!dom) throw std::invalid_argument("to_modal: field has no domain");
  if (truncation < 1 || truncation > dom->max_modes())
    throw std::invalid_argument("to_modal: truncation exceeds resolution");
  Eigen::MatrixXcd full = dom->to_spectral(f.values());
  Eigen::VectorXcd out(truncation);
  const auto& order = dom->ordered_modes();
  for (int k = 0; k < truncation; ++k) {
    const EigenPair& ep = order[k];
    out[k] = full(ep.kx - 1, (ep.ky > 0) ? ep.ky - 1 : 0);
  }
  return ModalCoeffs{dom, std::move(out)};
}

Field from_modal(const ModalCoeffs& mc) {
  if (!mc.domain) throw std::invalid_argument("from_modal: null domain");
  if (mc.count() < 1 || mc.count() > mc.domain->max_modes())
    throw std::invalid_argument("from_modal: truncation exceeds resolution");
  Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(mc.domain->modes_x(),
                                                 mc.domain->modes_y());
  const auto& order = mc.domain->ordered_modes();
  for (int k = 0; k < mc.count(); ++k) {
    const EigenPair& ep = order[k];
    full(ep.kx - 1, (ep.ky > 0) ? ep.ky - 1 : 0) = mc.coeffs[k];
  }
  return Field(mc.domain, mc.domain->to_grid(full));
}

Field laplacian_apply(const Field& f) {
  const DomainPtr& dom = f.domain();
  if (!dom) throw std::invalid_argument("laplacian_apply: field has no domain");
  Eigen::MatrixXcd c = dom->to_spectral(f.values());
  for (int iy = 0; iy < c.cols(); ++iy)
    for (int ix = 0; ix < c.rows(); ++ix)
      c(ix, iy) *= -(dom->axis_lambda_x(ix) + dom->axis_lambda_y(iy));
  return Field(dom, dom->to_grid(c));
}

Norms compute_norms(const Field& f, double p) {
  const DomainPtr& dom = f.domain();
  if (!dom) throw std::invalid_argument("compute_norms: field has no domain");
  const Eigen::VectorXd& w = dom->quadrature_weights();
  Norms n;
  const double q = p + 2.0;
  for (int i = 0; i < f.size(); ++i) {
    const double a2 = std::norm(f.values()[i]);
    n.l2_sq += w[i] * a2;
    n.lpp += w[i] * std::pow(a2, 0.5 * q);
  }
  Eigen::MatrixXcd c = dom->to_spectral(f.values());
  for (int iy = 0; iy < c.cols(); ++iy)
    for (int ix = 0; ix < c.rows(); ++ix)
      n.h1_semi_sq +=
          (dom->axis_lambda_x(ix) + dom->axis_lambda_y(iy)) * std::norm(c(ix, iy));
  const double scale = (dom->kind() == DomainKind::Rectangle)
                           ? std::max(dom->length(0), dom->length(1))
                           : dom->length(0);
  n.h1_equiv_sq = n.l2_sq / (scale * scale) + n.h1_semi_sq;
  return n;
}

double parseval_residual(const Field& f) {
  const DomainPtr& dom = f.domain();
  if (!dom) throw std::invalid_argument("parseval_residual: no domain");
  const Eigen::VectorXd& w = dom->quadrature_weights();
  double quad = 0.0;
  for (int i = 0; i < f.size(); ++i) quad += w[i] * std::norm(f.values()[i]);
  const double modal = dom->to_spectral(f.values()).squaredNorm();
  return std::abs(quad - modal);
}

}  // namespace cgle
