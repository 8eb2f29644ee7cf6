#include "hrb/fom.hpp"

namespace hrb {

SensitivityTrajectory solve_sensitivities(const ParameterVector& mu, const StateTrajectory& traj,
                                          const AssembledOperators& ops) {
  const int ny = ops.dim_y(), nq = ops.dim_q(), steps = traj.steps();
  const double dt = traj.grid.dt();
  SensitivityTrajectory s;
  for (int i = 0; i < 4; ++i) {
    s.s_y[i] = Matrix::Zero(ny, steps);
    s.s_q[i] = Matrix::Zero(nq, steps);
  }

  // Step 1: y^1 does not depend on mu; linearised elliptic equation for q^1.
  {
    const Vector y = traj.y.col(0), q = traj.q.col(0);
    const NodalNonlinearity nl = nonlinearity(y, q);
    const Vector fq = nl.f.tail(nq);
    const Vector dfq = nl.df_dq.tail(nq);
    Matrix jqq = mu[2] * ops.stiffness_2.dense() + mu[3] * ops.mass_q.dense() * dfq.asDiagonal();
    Matrix rhs = Matrix::Zero(nq, 4);
    rhs.col(2) = -(ops.stiffness_2 * q);
    rhs.col(3) = -(ops.mass_q * fq);
    const Matrix sol = jqq.partialPivLu().solve(rhs);
    for (int i = 0; i < 4; ++i) s.s_q[i].col(0) = sol.col(i);
  }

  CoupledJacobian jac(ops);
  for (int k = 1; k < steps; ++k) {
    const Vector y = traj.y.col(k), q = traj.q.col(k);
    jac.assemble(mu, y, q, dt);
    const Vector f = nonlinearity(y, q, false).f;
    Matrix rhs = Matrix::Zero(ny + nq, 4);
    rhs.col(0).head(ny) = -dt * (ops.stiffness_1 * y);
    rhs.col(1).head(ny) = dt * (ops.mass_y * f);
    rhs.col(2).tail(nq) = -(ops.stiffness_2 * q);
    rhs.col(3).tail(nq) = -(ops.mass_q * Vector(f.tail(nq)));
    for (int i = 0; i < 4; ++i) rhs.col(i).head(ny) += ops.mass_y * Vector(s.s_y[i].col(k - 1));
    jac.solve(rhs);
    for (int i = 0; i < 4; ++i) {
      s.s_y[i].col(k) = rhs.col(i).head(ny);
      s.s_q[i].col(k) = rhs.col(i).tail(nq);
    }
  }
  return s;
}

}  // namespace hrb
