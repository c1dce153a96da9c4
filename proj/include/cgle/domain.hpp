// Spectral discretization of intervals and rectangles for the complex
// Ginzburg-Landau solver.  The Laplacian eigenbasis is known in closed form
// (sines for Dirichlet, cosines plus the constant for Neumann), so transforms
// between grid values and modal coefficients are plain dense contractions
// against precomputed basis tables.  The quadrature rule is chosen per
// boundary condition so that the discrete eigenfunctions are orthonormal to
// round-off, which keeps Parseval-type identities exact for band-limited
// fields; the energy estimates verified downstream depend on that.

#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <memory>
#include <vector>

namespace cgle {

using Complex = std::complex<double>;

enum class BoundaryCondition { Dirichlet, Neumann };
enum class DomainKind { Interval, Rectangle };

// User-facing description of a domain.  For intervals only lengths[0] is
// read; rectangles are Dirichlet-only (no closed-form Neumann contract here).
struct DomainSpec {
  DomainKind kind = DomainKind::Interval;
  std::array<double, 2> lengths{1.0, 1.0};
  int grid_points = 64;  // per axis
  BoundaryCondition bc = BoundaryCondition::Dirichlet;
};

// One Laplacian eigenpair.  Mode indices are 1-based per axis; ky == 0 marks
// an interval mode.
struct EigenPair {
  double lambda = 0.0;
  int kx = 0;
  int ky = 0;
};

// Immutable discretized domain.  Holds the grid, quadrature weights, per-axis
// basis tables restricted to the representable band (M-1 modes per axis), and
// the global eigenvalue ordering (nondecreasing, lexicographic tie-break).
// Fields reference their domain through shared_ptr so trajectories and sweeps
// can share one instance across threads.
class Domain {
 public:
  explicit Domain(const DomainSpec& spec);

  DomainKind kind() const { return spec_.kind; }
  BoundaryCondition bc() const { return spec_.bc; }
  int grid_points() const { return spec_.grid_points; }
  double length(int axis = 0) const { return spec_.lengths[axis]; }
  int dimension() const { return spec_.kind == DomainKind::Interval ? 1 : 2; }

  // Total grid nodes (Mx * My; My = 1 for intervals).
  int node_count() const { return static_cast<int>(weights_flat_.size()); }
  int nodes_x() const { return static_cast<int>(nodes_x_.size()); }
  int nodes_y() const { return static_cast<int>(nodes_y_.size()); }
  // Largest admissible modal truncation, (M-1)^dim.
  int max_modes() const { return static_cast<int>(ordered_.size()); }
  int modes_x() const { return static_cast<int>(lambda_x_.size()); }
  int modes_y() const { return static_cast<int>(lambda_y_.size()); }

  double node_x(int i) const { return nodes_x_[i]; }
  double node_y(int j) const { return nodes_y_[j]; }
  // Grid spacing along x: L/(M+1) for Dirichlet, L/(M-1) for Neumann.
  double spacing_x() const { return dx_; }

  // Flattened node ordering is x-fastest: flat = i + j*Mx.
  const Eigen::VectorXd& quadrature_weights() const { return weights_flat_; }
  const std::vector<EigenPair>& ordered_modes() const { return ordered_; }

  // Full-band transforms used by norms and the time stepper.  Coefficients
  // are returned as a modes_x() x modes_y() matrix (one column for
  // intervals).  Exact inverses of each other for band-limited data.
  Eigen::MatrixXcd to_spectral(const Eigen::VectorXcd& grid_values) const;
  Eigen::VectorXcd to_grid(const Eigen::MatrixXcd& coeffs) const;

  double axis_lambda_x(int k) const { return lambda_x_[k]; }  // 0-based
  double axis_lambda_y(int k) const { return lambda_y_[k]; }

  // Eigenfunction values on the grid for a 0-based position in the global
  // ordering, as a flat vector.
  Eigen::VectorXd eigenfunction_values(int ordered_index) const;

 private:
  DomainSpec spec_;
  double dx_ = 0.0;
  std::vector<double> nodes_x_, nodes_y_;
  Eigen::VectorXd wx_, wy_, weights_flat_;
  Eigen::MatrixXd basis_x_, basis_y_;  // nodes x modes
  Eigen::VectorXd lambda_x_, lambda_y_;
  std::vector<EigenPair> ordered_;
};

using DomainPtr = std::shared_ptr<const Domain>;

// Validates the spec (positive lengths, M >= 16, rectangle implies Dirichlet)
// and builds the discretization.  Throws std::invalid_argument on violation.
DomainPtr build_domain(const DomainSpec& spec);

// Complex scalar field sampled on the grid of a fixed domain, x-fastest.
class Field {
 public:
  Field() = default;
  explicit Field(DomainPtr domain)
      : domain_(std::move(domain)),
        values_(Eigen::VectorXcd::Zero(domain_->node_count())) {}
  Field(DomainPtr domain, Eigen::VectorXcd values);

  const DomainPtr& domain() const { return domain_; }
  const Eigen::VectorXcd& values() const { return values_; }
  Eigen::VectorXcd& values() { return values_; }
  int size() const { return static_cast<int>(values_.size()); }

 private:
  DomainPtr domain_;
  Eigen::VectorXcd values_;
};

// The first `count` eigenpairs of -Laplacian on the domain, sorted by
// nondecreasing eigenvalue with lexicographic (kx, ky) tie-break.
class EigenSystem {
 public:
  EigenSystem() = default;
  EigenSystem(DomainPtr domain, std::vector<EigenPair> pairs)
      : domain_(std::move(domain)), pairs_(std::move(pairs)) {}

  const DomainPtr& domain() const { return domain_; }
  int count() const { return static_cast<int>(pairs_.size()); }
  const EigenPair& pair(int k) const { return pairs_[k]; }          // 0-based
  double lambda(int k) const { return pairs_[k].lambda; }           // 0-based
  const std::vector<EigenPair>& pairs() const { return pairs_; }

 private:
  DomainPtr domain_;
  std::vector<EigenPair> pairs_;
};

// Throws if count exceeds the representable band for the domain resolution.
EigenSystem eigen_system(const DomainPtr& domain, int count);

// Modal coefficients c_k = (f, w_k) against the ordered eigenfunctions.
struct ModalCoeffs {
  DomainPtr domain;
  Eigen::VectorXcd coeffs;
  int count() const { return static_cast<int>(coeffs.size()); }
};

// Quadrature inner products against the first K ordered eigenfunctions.
ModalCoeffs to_modal(const Field& f, int truncation);
// Synthesis sum(c_k w_k); exact round-trip with to_modal for band-limited f.
Field from_modal(const ModalCoeffs& coeffs);
// Spectral Laplacian: modal multiply by -lambda_k over the full band.
Field laplacian_apply(const Field& f);

struct Norms {
  double l2_sq = 0.0;        // quadrature of |f|^2
  double h1_semi_sq = 0.0;   // sum lambda_k |c_k|^2 (spectral derivative)
  double h1_equiv_sq = 0.0;  // l2_sq / L^2 + h1_semi_sq
  double lpp = 0.0;          // quadrature of |f|^(p+2)
};

// All norms are taken with the domain quadrature; the H1 seminorm is the
// Parseval sum over the full representable band.  For rectangles the
// equivalent-norm scale L is the longer side.
Norms compute_norms(const Field& f, double p);

// |l2_sq - sum |c_k|^2| over the full band; ~1e-14 for band-limited fields.
double parseval_residual(const Field& f);

}  // namespace cgle
