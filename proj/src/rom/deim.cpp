#include <Eigen/LU>
#include <cmath>
#include <stdexcept>
#include <string>

#include "hrb/errors.hpp"
#include "hrb/rom.hpp"

namespace hrb {

namespace {

// Ties go to the lowest index.
Eigen::Index argmax_abs(const Vector& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  return best;
}

DeimInterpolant select_points(Matrix basis) {
  DeimInterpolant d;
  const Eigen::Index lf = basis.cols();
  d.points.push_back(static_cast<int>(argmax_abs(basis.col(0))));
  for (Eigen::Index l = 1; l < lf; ++l) {
    Matrix pu(l, l);
    Vector pn(l);
    for (Eigen::Index a = 0; a < l; ++a) {
      pu.row(a) = basis.row(d.points[a]).head(l);
      pn[a] = basis(d.points[a], l);
    }
    const Vector c = pu.partialPivLu().solve(pn);
    const Vector r = basis.col(l) - basis.leftCols(l) * c;
    d.points.push_back(static_cast<int>(argmax_abs(r)));
  }
  d.sampled_basis.resize(lf, lf);
  for (Eigen::Index a = 0; a < lf; ++a) d.sampled_basis.row(a) = basis.row(d.points[a]);
  if (!Eigen::FullPivLU<Matrix>(d.sampled_basis).isInvertible())
    throw SingularSystem("deim: sampled basis is singular");
  d.basis = std::move(basis);
  return d;
}

}  // namespace

Matrix DeimInterpolant::interpolate(const Matrix& snapshots) const {
  Matrix sampled(size(), snapshots.cols());
  for (int a = 0; a < size(); ++a) sampled.row(a) = snapshots.row(points[a]);
  return basis * sampled_basis.partialPivLu().solve(sampled);
}

Matrix DeimInterpolant::padded_basis() const {
  Matrix p = Matrix::Zero(basis.rows() + 1, basis.cols());
  p.bottomRows(basis.rows()) = basis;
  return p;
}

DeimInterpolant deim_build(const Matrix& snapshots, int size) {
  if (size < 1) throw std::invalid_argument("deim: size must be >= 1");
  PodResult p = pod(snapshots, PodRule::energy(0.0));
  if (p.numerical_rank < size)
    throw SingularSystem("deim: requested " + std::to_string(size) +
                         " modes but the snapshots have numerical rank " +
                         std::to_string(p.numerical_rank));
  return select_points(p.basis.leftCols(size));
}

DeimInterpolant deim_build(const Matrix& snapshots, double energy_tol, int cap) {
  PodResult p = pod(snapshots, PodRule::energy(energy_tol, cap));
  if (p.basis.cols() < 1) throw SingularSystem("deim: snapshots are zero");
  return select_points(std::move(p.basis));
}

}  // namespace hrb
