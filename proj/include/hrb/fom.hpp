#pragma once

#include <array>
#include <utility>
#include <vector>

#include "hrb/band.hpp"
#include "hrb/fe.hpp"
#include "hrb/problem.hpp"

namespace hrb {

/// Floor applied to y before evaluating sqrt(y) and its derivative.
inline constexpr double kPositivityFloor = 1e-12;
/// A full-order iterate with min y below this is rejected with PositivityLost.
inline constexpr double kPositivityAbort = -1e-8;

double f_eval(double y, double q);
/// (df/dy, df/dq) at (max(y, floor), q).
std::pair<double, double> f_partials(double y, double q);

/// Nodal values of f and its partials over the nodes of V. \p q_v0 lives on V0;
/// node 0 uses q = 0 (the Dirichlet value), so f[0] = 0.
struct NodalNonlinearity {
  Vector f, df_dy, df_dq;
};
NodalNonlinearity nonlinearity(const Vector& y, const Vector& q_v0, bool with_partials = true);

struct NewtonConfig {
  double abs_tol = 1e-10;
  int max_iter = 25;
  int max_halvings = 10;
  double armijo = 1e-4;

  void validate() const;
};

/// F_mu(y, q) for one implicit Euler step, stacked as [parabolic (n+1); elliptic (n)].
Vector residual(const ParameterVector& mu, const Vector& y_prev, const Vector& y, const Vector& q,
                const Vector& b_k, const AssembledOperators& ops, double dt);

/// Dense Jacobian of residual() with respect to (y, q) in stacked ordering.
Matrix residual_jacobian(const ParameterVector& mu, const Vector& y, const Vector& q,
                         const AssembledOperators& ops, double dt);

/// Banded Jacobian of the coupled step in interleaved ordering
/// (y_0, q_1, y_1, q_2, y_2, ...), factorised for repeated solves.
class CoupledJacobian {
 public:
  explicit CoupledJacobian(const AssembledOperators& ops);

  void assemble(const ParameterVector& mu, const Vector& y, const Vector& q, double dt);
  /// Solves J [dy; dq] = [ry; rq] in place on stacked vectors.
  void solve(Vector& stacked) const;
  void solve(Matrix& stacked) const;

 private:
  const AssembledOperators* ops_;
  int ny_, nq_;
  BandLU lu_;
  mutable Vector work_;
};

struct StateTrajectory {
  TimeGrid grid{1.0, 2};
  Matrix y;  ///< (n+1) x K
  Matrix q;  ///< n x K
  std::vector<int> newton_iterations;   ///< per time step
  std::vector<double> newton_residual;  ///< final residual norm per time step
  double min_y = 0.0;
  double max_y = 0.0;
  int min_y_step = 0;
  /// True if some y value fell below the positivity floor.
  bool positivity_violated = false;

  int steps() const { return static_cast<int>(y.cols()); }
};

/// Elliptic equation at t_1 for fixed y: mu3 A2 q + mu4 Mq f_q(y, q) + b = 0, started at q = 0.
Vector solve_consistent_initial_q(const ParameterVector& mu, const Vector& y1, double u_t1,
                                  const AssembledOperators& ops, const NewtonConfig& cfg = {});

/// Implicit Euler trajectory. Throws NewtonDiverged or PositivityLost; warns (stderr) if
/// mu lies outside the parameter box.
StateTrajectory solve_fom(const ParameterVector& mu, const ProblemDefinition& problem,
                          const FeSpace& space, const AssembledOperators& ops,
                          const TimeGrid& grid, const NewtonConfig& cfg = {});

/// Derivatives of (y^k, q^k) with respect to each mu_i.
struct SensitivityTrajectory {
  std::array<Matrix, 4> s_y;
  std::array<Matrix, 4> s_q;
};

SensitivityTrajectory solve_sensitivities(const ParameterVector& mu, const StateTrajectory& traj,
                                          const AssembledOperators& ops);

/// Nodal f over V for every column of a trajectory, (n+1) x K.
Matrix nonlinearity_snapshots(const StateTrajectory& traj);

}  // namespace hrb
