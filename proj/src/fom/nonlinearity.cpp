#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hrb/fom.hpp"
#include "hrb/kernels.hpp"

namespace hrb {

double f_eval(double y, double q) { return std::sqrt(std::max(y, kPositivityFloor)) * std::sinh(q); }

std::pair<double, double> f_partials(double y, double q) {
  const double r = std::sqrt(std::max(y, kPositivityFloor));
  return {std::sinh(q) / (2.0 * r), r * std::cosh(q)};
}

NodalNonlinearity nonlinearity(const Vector& y, const Vector& q_v0, bool with_partials) {
  const Eigen::Index n = y.size();
  if (q_v0.size() != n - 1) throw std::invalid_argument("nonlinearity: size mismatch");
  Vector q(n);
  q[0] = 0.0;
  q.tail(n - 1) = q_v0;
  NodalNonlinearity out;
  out.f.resize(n);
  const auto len = static_cast<std::size_t>(n);
  if (with_partials) {
    out.df_dy.resize(n);
    out.df_dq.resize(n);
    kernels::sqrt_sinh({y.data(), len}, {q.data(), len}, kPositivityFloor, {out.f.data(), len},
                       {out.df_dy.data(), len}, {out.df_dq.data(), len});
  } else {
    kernels::sqrt_sinh({y.data(), len}, {q.data(), len}, kPositivityFloor, {out.f.data(), len}, {},
                       {});
  }
  return out;
}

Matrix nonlinearity_snapshots(const StateTrajectory& traj) {
  Matrix f(traj.y.rows(), traj.y.cols());
  for (Eigen::Index k = 0; k < traj.y.cols(); ++k)
    f.col(k) = nonlinearity(traj.y.col(k), traj.q.col(k), false).f;
  return f;
}

}  // namespace hrb
