#include <cmath>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "hrb/errors.hpp"
#include "hrb/fom.hpp"

namespace hrb {

namespace {

std::size_t pos_y(int node) { return static_cast<std::size_t>(2 * node); }
std::size_t pos_q(int node) { return static_cast<std::size_t>(2 * node - 1); }

Vector elliptic_residual(const ParameterVector& mu, const Vector& q, const Vector& f,
                         const Vector& b, const AssembledOperators& ops) {
  const Vector fq = f.tail(f.size() - 1);
  return mu[2] * (ops.stiffness_2 * q) + mu[3] * (ops.mass_q * fq) + b;
}

}  // namespace

void NewtonConfig::validate() const {
  if (!(abs_tol > 0.0)) throw std::invalid_argument("newton: abs_tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("newton: max_iter must be >= 1");
  if (max_halvings < 0) throw std::invalid_argument("newton: max_halvings must be >= 0");
}

Vector residual(const ParameterVector& mu, const Vector& y_prev, const Vector& y, const Vector& q,
                const Vector& b_k, const AssembledOperators& ops, double dt) {
  const int ny = ops.dim_y(), nq = ops.dim_q();
  if (y.size() != ny || y_prev.size() != ny || q.size() != nq || b_k.size() != nq)
    throw std::invalid_argument("residual: size mismatch");
  const Vector f = nonlinearity(y, q, false).f;
  Vector out(ny + nq);
  out.head(ny) = ops.mass_y * y + (mu[0] * dt) * (ops.stiffness_1 * y) - ops.mass_y * y_prev -
                 (mu[1] * dt) * (ops.mass_y * f);
  out.tail(nq) = elliptic_residual(mu, q, f, b_k, ops);
  return out;
}

Matrix residual_jacobian(const ParameterVector& mu, const Vector& y, const Vector& q,
                         const AssembledOperators& ops, double dt) {
  const int ny = ops.dim_y(), nq = ops.dim_q();
  const NodalNonlinearity nl = nonlinearity(y, q);
  const Matrix m = ops.mass_y.dense();
  Matrix jac = Matrix::Zero(ny + nq, ny + nq);
  jac.topLeftCorner(ny, ny) = m + mu[0] * dt * ops.stiffness_1.dense() -
                              mu[1] * dt * m * nl.df_dy.asDiagonal();
  const Vector dfq = nl.df_dq.tail(nq);
  const Vector dfy = nl.df_dy.tail(nq);
  jac.topRightCorner(ny, nq) = -mu[1] * dt * m.rightCols(nq) * dfq.asDiagonal();
  const Matrix mq = ops.mass_q.dense();
  jac.bottomLeftCorner(nq, ny).rightCols(nq) = mu[3] * mq * dfy.asDiagonal();
  jac.bottomRightCorner(nq, nq) = mu[2] * ops.stiffness_2.dense() + mu[3] * mq * dfq.asDiagonal();
  return jac;
}

CoupledJacobian::CoupledJacobian(const AssembledOperators& ops)
    : ops_(&ops),
      ny_(ops.dim_y()),
      nq_(ops.dim_q()),
      lu_(static_cast<std::size_t>(ops.dim_y() + ops.dim_q()), 2 * ops.mass_y.bandwidth() + 1,
          2 * ops.mass_y.bandwidth() + 1),
      work_(ops.dim_y() + ops.dim_q()) {}

void CoupledJacobian::assemble(const ParameterVector& mu, const Vector& y, const Vector& q,
                               double dt) {
  const AssembledOperators& ops = *ops_;
  const NodalNonlinearity nl = nonlinearity(y, q);
  const int p = static_cast<int>(ops.mass_y.bandwidth());
  lu_.set_zero();
  for (int i = 0; i < ny_; ++i) {
    for (int j = std::max(0, i - p); j <= std::min(ny_ - 1, i + p); ++j) {
      const double m = ops.mass_y(i, j);
      lu_.add(pos_y(i), pos_y(j),
              m + mu[0] * dt * ops.stiffness_1(i, j) - mu[1] * dt * m * nl.df_dy[j]);
      if (j >= 1) lu_.add(pos_y(i), pos_q(j), -mu[1] * dt * m * nl.df_dq[j]);
      if (i >= 1 && j >= 1) {
        lu_.add(pos_q(i), pos_y(j), mu[3] * m * nl.df_dy[j]);
        lu_.add(pos_q(i), pos_q(j),
                mu[2] * ops.stiffness_2(i - 1, j - 1) + mu[3] * m * nl.df_dq[j]);
      }
    }
  }
  lu_.factorize();
}

void CoupledJacobian::solve(Vector& stacked) const {
  for (int i = 0; i < ny_; ++i) work_[pos_y(i)] = stacked[i];
  for (int j = 1; j <= nq_; ++j) work_[pos_q(j)] = stacked[ny_ + j - 1];
  lu_.solve(std::span<double>(work_.data(), work_.size()));
  for (int i = 0; i < ny_; ++i) stacked[i] = work_[pos_y(i)];
  for (int j = 1; j <= nq_; ++j) stacked[ny_ + j - 1] = work_[pos_q(j)];
}

void CoupledJacobian::solve(Matrix& stacked) const {
  Matrix w(stacked.rows(), stacked.cols());
  for (int i = 0; i < ny_; ++i) w.row(pos_y(i)) = stacked.row(i);
  for (int j = 1; j <= nq_; ++j) w.row(pos_q(j)) = stacked.row(ny_ + j - 1);
  lu_.solve(w);
  for (int i = 0; i < ny_; ++i) stacked.row(i) = w.row(pos_y(i));
  for (int j = 1; j <= nq_; ++j) stacked.row(ny_ + j - 1) = w.row(pos_q(j));
}

Vector solve_consistent_initial_q(const ParameterVector& mu, const Vector& y1, double u_t1,
                                  const AssembledOperators& ops, const NewtonConfig& cfg) {
  cfg.validate();
  const int nq = ops.dim_q();
  const int p = static_cast<int>(ops.mass_q.bandwidth());
  Vector b = Vector::Zero(nq);
  b[ops.boundary_index] = u_t1;
  Vector q = Vector::Zero(nq);
  Vector g = elliptic_residual(mu, q, nonlinearity(y1, q, false).f, b, ops);
  double r = g.norm();
  BandLU lu(static_cast<std::size_t>(nq), static_cast<std::size_t>(p),
            static_cast<std::size_t>(p));
  for (int it = 0; it < cfg.max_iter && r > cfg.abs_tol; ++it) {
    const NodalNonlinearity nl = nonlinearity(y1, q);
    lu.set_zero();
    for (int i = 0; i < nq; ++i)
      for (int j = std::max(0, i - p); j <= std::min(nq - 1, i + p); ++j)
        lu.add(i, j, mu[2] * ops.stiffness_2(i, j) + mu[3] * ops.mass_q(i, j) * nl.df_dq[j + 1]);
    lu.factorize();
    Vector delta = -g;
    lu.solve(std::span<double>(delta.data(), delta.size()));
    double t = 1.0;
    bool accepted = false;
    for (int h = 0; h <= cfg.max_halvings; ++h, t *= 0.5) {
      const Vector trial = q + t * delta;
      const Vector gt = elliptic_residual(mu, trial, nonlinearity(y1, trial, false).f, b, ops);
      const double rt = gt.norm();
      if (!std::isfinite(rt)) continue;
      if (rt <= (1.0 - cfg.armijo * t) * r || (h == cfg.max_halvings && rt < r)) {
        q = trial;
        g = gt;
        r = rt;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  if (!(r <= cfg.abs_tol)) {
    std::ostringstream os;
    os << "initial elliptic Newton did not converge at mu=" << to_string(mu)
       << ", residual " << r;
    throw NewtonDiverged(1, r, os.str());
  }
  return q;
}

StateTrajectory solve_fom(const ParameterVector& mu, const ProblemDefinition& problem,
                          const FeSpace& space, const AssembledOperators& ops,
                          const TimeGrid& grid, const NewtonConfig& cfg) {
  cfg.validate();
  if (!problem.box.contains(mu, 1e-12))
    std::cerr << "warning: mu=" << to_string(mu) << " is outside the parameter box\n";
  const int ny = ops.dim_y(), nq = ops.dim_q(), steps = grid.size();
  const double dt = grid.dt();

  StateTrajectory traj;
  traj.grid = grid;
  traj.y.resize(ny, steps);
  traj.q.resize(nq, steps);
  traj.newton_iterations.assign(steps, 0);
  traj.newton_residual.assign(steps, 0.0);

  auto monitor = [&](int k) {
    const double lo = traj.y.col(k).minCoeff();
    const double hi = traj.y.col(k).maxCoeff();
    if (k == 0 || lo < traj.min_y) {
      traj.min_y = lo;
      traj.min_y_step = k;
    }
    traj.max_y = k == 0 ? hi : std::max(traj.max_y, hi);
    if (lo < kPositivityFloor) traj.positivity_violated = true;
    if (lo < kPositivityAbort) {
      std::ostringstream os;
      os << "state y lost positivity at step " << k + 1 << " (min y = " << lo
         << ") for mu=" << to_string(mu);
      throw PositivityLost(k + 1, lo, os.str());
    }
  };

  traj.y.col(0) = project_initial(problem, space, ops);
  monitor(0);
  traj.q.col(0) = solve_consistent_initial_q(mu, traj.y.col(0), problem.input(grid.time(0)), ops, cfg);

  CoupledJacobian jac(ops);
  Vector b = Vector::Zero(nq);
  for (int k = 1; k < steps; ++k) {
    b[ops.boundary_index] = problem.input(grid.time(k));
    const Vector y_prev = traj.y.col(k - 1);
    Vector y = y_prev;
    Vector q = traj.q.col(k - 1);
    Vector f = residual(mu, y_prev, y, q, b, ops, dt);
    double r = f.norm();
    int it = 0;
    for (; it < cfg.max_iter && r > cfg.abs_tol; ++it) {
      jac.assemble(mu, y, q, dt);
      Vector delta = -f;
      jac.solve(delta);
      double t = 1.0;
      bool accepted = false;
      for (int h = 0; h <= cfg.max_halvings; ++h, t *= 0.5) {
        const Vector yt = y + t * delta.head(ny);
        const Vector qt = q + t * delta.tail(nq);
        const Vector ft = residual(mu, y_prev, yt, qt, b, ops, dt);
        const double rt = ft.norm();
        if (!std::isfinite(rt)) continue;
        if (rt <= (1.0 - cfg.armijo * t) * r || (h == cfg.max_halvings && rt < r)) {
          y = yt;
          q = qt;
          f = ft;
          r = rt;
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
    }
    if (!(r <= cfg.abs_tol)) {
      std::ostringstream os;
      os << "Newton did not converge at step " << k + 1 << " for mu=" << to_string(mu)
         << ", residual " << r;
      throw NewtonDiverged(k + 1, r, os.str());
    }
    traj.y.col(k) = y;
    traj.q.col(k) = q;
    traj.newton_iterations[k] = it;
    traj.newton_residual[k] = r;
    monitor(k);
  }
  return traj;
}

}  // namespace hrb
