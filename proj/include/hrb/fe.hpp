#pragma once

#include <vector>

#include "hrb/band.hpp"
#include "hrb/problem.hpp"

namespace hrb {

/// Gauss-Legendre rule on the reference cell [0, 1].
struct QuadratureRule {
  std::vector<double> points;
  std::vector<double> weights;

  /// Supports 1 to 5 points.
  static QuadratureRule gauss(int num_points);
};

/// Uniform mesh of [0, L] with continuous Lagrange elements of order 1 or 2.
///
/// Degrees of freedom are numbered by node position, so dof i sits at x_i = i h / order.
/// V uses dofs 0..n; the Dirichlet subspace V0 drops dof 0 and numbers the rest 0..n-1.
class FeSpace {
 public:
  FeSpace(double length, int n_cells, int order);

  double length() const noexcept { return length_; }
  int n_cells() const noexcept { return n_cells_; }
  int order() const noexcept { return order_; }
  double cell_width() const noexcept { return h_; }
  int dim_v() const noexcept { return order_ * n_cells_ + 1; }
  int dim_v0() const noexcept { return order_ * n_cells_; }
  double node(int i) const noexcept { return i * h_ / order_; }
  std::vector<double> nodes() const;
  /// Index of the x = L dof in V0 numbering.
  int boundary_index() const noexcept { return dim_v0() - 1; }

  int cell_dof(int cell, int local) const noexcept { return order_ * cell + local; }
  /// Local shape function \p local and its x-derivative at reference coordinate xi.
  double shape(int local, double xi) const;
  double shape_dx(int local, double xi) const;
  /// Evaluates sum_i coeffs[i] phi_i(x) for a V coefficient vector.
  double evaluate(const Vector& coeffs, double x) const;

 private:
  double length_;
  int n_cells_;
  int order_;
  double h_;
};

FeSpace build_space(const ProblemDefinition& problem, int n_cells, int order);

/// The parameter-independent matrices of the semi-discrete system.
struct AssembledOperators {
  SymBandMatrix mass_y;           ///< <phi_j, phi_i>_H on V
  SymBandMatrix stiffness_1;      ///< int kappa_1 phi_j' phi_i' on V
  SymBandMatrix mass_q;           ///< mass on V0
  SymBandMatrix stiffness_2;      ///< int kappa_2 phi_j' phi_i' on V0
  SymBandMatrix gram_y;           ///< V inner product: mass + plain stiffness
  SymBandMatrix gram_q;           ///< V0 inner product: plain stiffness on V0
  SymBandMatrix plain_stiffness;  ///< int phi_j' phi_i' on V
  int boundary_index = 0;

  int dim_y() const { return static_cast<int>(mass_y.size()); }
  int dim_q() const { return static_cast<int>(mass_q.size()); }
};

/// Throws std::invalid_argument if kappa_1 or kappa_2 is not positive at a quadrature point.
AssembledOperators assemble(const ProblemDefinition& problem, const FeSpace& space);

/// Load vector (<g, phi_i>_H)_i over V.
Vector load_vector(const FeSpace& space, const ScalarFunction& g);

/// L2 projection of the initial value: solves M_y y = (<y0, phi_i>_H)_i.
Vector project_initial(const ProblemDefinition& problem, const FeSpace& space,
                       const AssembledOperators& ops);

/// (<b(t), phi_i>)_i over V0: zero except u(t) at the x = L dof.
Vector boundary_vector(const ProblemDefinition& problem, const FeSpace& space, double t);

}  // namespace hrb
