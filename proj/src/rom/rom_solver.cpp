#include <Eigen/LU>
#include <cmath>
#include <sstream>

#include "hrb/errors.hpp"
#include "hrb/kernels.hpp"
#include "hrb/rom.hpp"

namespace hrb {

namespace {

struct Sampled {
  Vector f, df_dy, df_dq;
};

Sampled sample(const RomOperators& rom, const Vector& y, const Vector& q, bool partials) {
  const Vector ys = rom.sample_y * y;
  const Vector qs = rom.sample_q * q;
  const auto n = static_cast<std::size_t>(ys.size());
  Sampled s;
  s.f.resize(ys.size());
  if (partials) {
    s.df_dy.resize(ys.size());
    s.df_dq.resize(ys.size());
    kernels::sqrt_sinh({ys.data(), n}, {qs.data(), n}, kPositivityFloor, {s.f.data(), n},
                       {s.df_dy.data(), n}, {s.df_dq.data(), n});
  } else {
    kernels::sqrt_sinh({ys.data(), n}, {qs.data(), n}, kPositivityFloor, {s.f.data(), n}, {}, {});
  }
  return s;
}

Vector reduced_residual(const ParameterVector& mu, const RomOperators& rom, const Matrix& lhs_y,
                        const Vector& my_prev, const Vector& y, const Vector& q, const Vector& b,
                        double dt) {
  const Vector f = sample(rom, y, q, false).f;
  Vector r(rom.ny + rom.nq);
  r.head(rom.ny) = lhs_y * y - my_prev - (mu[1] * dt) * (rom.g_y * f);
  r.tail(rom.nq) = mu[2] * (rom.stiffness_2 * q) + mu[3] * (rom.g_q * f) + b;
  return r;
}

Matrix reduced_jacobian(const ParameterVector& mu, const RomOperators& rom, const Matrix& lhs_y,
                        const Vector& y, const Vector& q, double dt) {
  const Sampled s = sample(rom, y, q, true);
  const Matrix dy = s.df_dy.asDiagonal() * rom.sample_y;
  const Matrix dq = s.df_dq.asDiagonal() * rom.sample_q;
  Matrix j(rom.ny + rom.nq, rom.ny + rom.nq);
  j.topLeftCorner(rom.ny, rom.ny) = lhs_y - (mu[1] * dt) * (rom.g_y * dy);
  j.topRightCorner(rom.ny, rom.nq) = -(mu[1] * dt) * (rom.g_y * dq);
  j.bottomLeftCorner(rom.nq, rom.ny) = mu[3] * (rom.g_q * dy);
  j.bottomRightCorner(rom.nq, rom.nq) = mu[2] * rom.stiffness_2 + mu[3] * (rom.g_q * dq);
  return j;
}

Matrix elliptic_jacobian(const ParameterVector& mu, const RomOperators& rom, const Vector& y,
                         const Vector& q) {
  const Sampled s = sample(rom, y, q, true);
  return mu[2] * rom.stiffness_2 + mu[3] * (rom.g_q * (s.df_dq.asDiagonal() * rom.sample_q));
}

[[noreturn]] void fail(int step, double r, const ParameterVector& mu) {
  std::ostringstream os;
  os << "reduced Newton did not converge at step " << step << " for mu=" << to_string(mu)
     << ", residual " << r;
  throw NewtonDiverged(step, r, os.str());
}

}  // namespace

RomTrajectory solve_rom(const ParameterVector& mu, const RomOperators& rom, const TimeGrid& grid,
                        const NewtonConfig& cfg) {
  cfg.validate();
  const int ny = rom.ny, nq = rom.nq, steps = grid.size();
  if (rom.input.cols() != steps) throw std::invalid_argument("solve_rom: grid/input mismatch");
  const double dt = grid.dt();
  RomTrajectory traj;
  traj.y.resize(ny, steps);
  traj.q.resize(nq, steps);
  traj.newton_iterations.assign(steps, 0);

  traj.y.col(0) = rom.mass_y.partialPivLu().solve(rom.y_init);

  // Consistent initial q.
  {
    const Vector y = traj.y.col(0);
    const Vector b = rom.input.col(0);
    auto res = [&](const Vector& q) {
      return Vector(mu[2] * (rom.stiffness_2 * q) + mu[3] * (rom.g_q * sample(rom, y, q, false).f) +
                    b);
    };
    Vector q = Vector::Zero(nq);
    Vector g = res(q);
    double r = g.norm();
    int it = 0;
    for (; it < cfg.max_iter && r > cfg.abs_tol; ++it) {
      const Vector delta = -elliptic_jacobian(mu, rom, y, q).partialPivLu().solve(g);
      double t = 1.0;
      bool accepted = false;
      for (int h = 0; h <= cfg.max_halvings; ++h, t *= 0.5) {
        const Vector qt = q + t * delta;
        const Vector gt = res(qt);
        const double rt = gt.norm();
        if (!std::isfinite(rt)) continue;
        if (rt <= (1.0 - cfg.armijo * t) * r || (h == cfg.max_halvings && rt < r)) {
          q = qt;
          g = gt;
          r = rt;
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
    }
    if (!(r <= cfg.abs_tol)) fail(1, r, mu);
    traj.q.col(0) = q;
    traj.newton_iterations[0] = it;
  }

  const Matrix lhs_y = rom.mass_y + (mu[0] * dt) * rom.stiffness_1;
  for (int k = 1; k < steps; ++k) {
    const Vector my_prev = rom.mass_y * traj.y.col(k - 1);
    const Vector b = rom.input.col(k);
    Vector y = traj.y.col(k - 1);
    Vector q = traj.q.col(k - 1);
    Vector f = reduced_residual(mu, rom, lhs_y, my_prev, y, q, b, dt);
    double r = f.norm();
    int it = 0;
    for (; it < cfg.max_iter && r > cfg.abs_tol; ++it) {
      const Vector delta = -reduced_jacobian(mu, rom, lhs_y, y, q, dt).partialPivLu().solve(f);
      double t = 1.0;
      bool accepted = false;
      for (int h = 0; h <= cfg.max_halvings; ++h, t *= 0.5) {
        const Vector yt = y + t * delta.head(ny);
        const Vector qt = q + t * delta.tail(nq);
        const Vector ft = reduced_residual(mu, rom, lhs_y, my_prev, yt, qt, b, dt);
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
    if (!(r <= cfg.abs_tol)) fail(k + 1, r, mu);
    traj.y.col(k) = y;
    traj.q.col(k) = q;
    traj.newton_iterations[k] = it;
  }
  traj.min_y_sampled = rom.deim_size() > 0 ? (rom.sample_y * traj.y).minCoeff() : 0.0;
  return traj;
}

RomSensitivities solve_rom_sensitivities(const ParameterVector& mu, const RomOperators& rom,
                                         const RomTrajectory& traj, const TimeGrid& grid) {
  const int ny = rom.ny, nq = rom.nq, steps = grid.size();
  const double dt = grid.dt();
  RomSensitivities s;
  for (int i = 0; i < 4; ++i) {
    s.s_y[i] = Matrix::Zero(ny, steps);
    s.s_q[i] = Matrix::Zero(nq, steps);
  }
  {
    const Vector y = traj.y.col(0), q = traj.q.col(0);
    const Vector f = sample(rom, y, q, false).f;
    Matrix rhs = Matrix::Zero(nq, 4);
    rhs.col(2) = -(rom.stiffness_2 * q);
    rhs.col(3) = -(rom.g_q * f);
    const Matrix sol = elliptic_jacobian(mu, rom, y, q).partialPivLu().solve(rhs);
    for (int i = 0; i < 4; ++i) s.s_q[i].col(0) = sol.col(i);
  }
  const Matrix lhs_y = rom.mass_y + (mu[0] * dt) * rom.stiffness_1;
  for (int k = 1; k < steps; ++k) {
    const Vector y = traj.y.col(k), q = traj.q.col(k);
    const Vector f = sample(rom, y, q, false).f;
    Matrix rhs = Matrix::Zero(ny + nq, 4);
    rhs.col(0).head(ny) = -dt * (rom.stiffness_1 * y);
    rhs.col(1).head(ny) = dt * (rom.g_y * f);
    rhs.col(2).tail(nq) = -(rom.stiffness_2 * q);
    rhs.col(3).tail(nq) = -(rom.g_q * f);
    for (int i = 0; i < 4; ++i) rhs.col(i).head(ny) += rom.mass_y * s.s_y[i].col(k - 1);
    const Matrix sol = reduced_jacobian(mu, rom, lhs_y, y, q, dt).partialPivLu().solve(rhs);
    for (int i = 0; i < 4; ++i) {
      s.s_y[i].col(k) = sol.col(i).head(ny);
      s.s_q[i].col(k) = sol.col(i).tail(nq);
    }
  }
  return s;
}

}  // namespace hrb
