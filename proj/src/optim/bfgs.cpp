#include <Eigen/Cholesky>
#include <cmath>

#include "hrb/optim.hpp"

namespace hrb {

namespace {

using Matrix4 = Eigen::Matrix4d;

bool is_active(const ParameterVector& x, const ParameterVector& g, const ParameterBox& box, int i) {
  const double eps = 1e-12 * (1.0 + std::abs(box.upper[i] - box.lower[i]));
  return (x[i] <= box.lower[i] + eps && g[i] > 0.0) || (x[i] >= box.upper[i] - eps && g[i] < 0.0);
}

// Quasi-Newton step on the free variables; fixed ones stay put.
ParameterVector direction(const Matrix4& b, const ParameterVector& x, const ParameterVector& g,
                          const ParameterBox& box) {
  std::vector<int> free;
  for (int i = 0; i < 4; ++i)
    if (!is_active(x, g, box, i)) free.push_back(i);
  ParameterVector d = ParameterVector::Zero();
  if (free.empty()) return d;
  const auto nf = static_cast<Eigen::Index>(free.size());
  Eigen::MatrixXd bf(nf, nf);
  Eigen::VectorXd gf(nf);
  for (Eigen::Index a = 0; a < nf; ++a) {
    gf[a] = g[free[a]];
    for (Eigen::Index c = 0; c < nf; ++c) bf(a, c) = b(free[a], free[c]);
  }
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(bf);
  Eigen::VectorXd df = ldlt.info() == Eigen::Success ? Eigen::VectorXd(-ldlt.solve(gf))
                                                     : Eigen::VectorXd(-gf);
  if (!df.allFinite() || df.dot(gf) >= 0.0) df = -gf;
  for (Eigen::Index a = 0; a < nf; ++a) d[free[a]] = df[a];
  return d;
}

}  // namespace

BfgsOutcome projected_bfgs(const std::function<std::optional<BfgsPoint>(const ParameterVector&)>& eval,
                           const BfgsPoint& start, const ParameterBox& box, const BfgsOptions& opt,
                           const std::function<bool(const BfgsPoint&)>& accept) {
  BfgsOutcome out;
  BfgsPoint x = start;
  x.mu = box.project(x.mu);
  out.best = x;
  Matrix4 b = Matrix4::Identity();
  bool scaled = false;
  for (;;) {
    if (projected_gradient(x.mu, x.g, box).norm() <= opt.gtol) {
      out.converged = true;
      break;
    }
    if (out.iterations >= opt.max_iter) break;
    ParameterVector d = direction(b, x.mu, x.g, box);
    if (!scaled) d /= std::max(1.0, d.lpNorm<Eigen::Infinity>());

    std::optional<BfgsPoint> next;
    double t = 1.0;
    for (int h = 0; h <= opt.max_line_search; ++h, t *= 0.5) {
      const ParameterVector trial = box.project(x.mu + t * d);
      if (trial == x.mu) break;
      std::optional<BfgsPoint> p = eval(trial);
      if (p && std::isfinite(p->f) && p->f <= x.f + opt.armijo * x.g.dot(trial - x.mu)) {
        next = std::move(p);
        break;
      }
    }
    if (!next) {
      out.line_search_failed = true;
      break;
    }
    ++out.iterations;
    const ParameterVector s = next->mu - x.mu;
    const ParameterVector y = next->g - x.g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        b = Matrix4::Identity() * (y.squaredNorm() / sy);
        scaled = true;
      }
      const ParameterVector bs = b * s;
      b += y * y.transpose() / sy - bs * bs.transpose() / s.dot(bs);
    }
    x = std::move(*next);
    out.best = x;
    if (accept && !accept(x)) {
      out.stopped = true;
      break;
    }
  }
  return out;
}

}  // namespace hrb
