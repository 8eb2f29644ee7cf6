#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

#include "hrb/rom.hpp"

namespace hrb {

namespace {

constexpr double kRankTol = 1e-11;

int select_rank(const Vector& sigma, int numerical_rank, const PodRule& rule, bool& truncated) {
  truncated = false;
  int r;
  if (rule.rank > 0) {
    r = rule.rank;
    if (r > numerical_rank) {
      std::cerr << "warning: POD rank " << r << " exceeds numerical rank " << numerical_rank
                << ", truncating\n";
      r = numerical_rank;
      truncated = true;
    }
  } else {
    if (!(rule.energy_tol >= 0.0 && rule.energy_tol < 1.0))
      throw std::invalid_argument("pod: energy tolerance must lie in [0, 1)");
    const double total = sigma.squaredNorm();
    double acc = 0.0;
    r = 0;
    while (r < numerical_rank && acc < (1.0 - rule.energy_tol) * total) {
      acc += sigma[r] * sigma[r];
      ++r;
    }
  }
  return std::min({r, rule.max_rank, numerical_rank});
}

PodResult pod_impl(const Matrix& snapshots, const Matrix* chol_lower, const SymBandMatrix* gram,
                   const PodRule& rule) {
  if (snapshots.cols() < 1) throw std::invalid_argument("pod: need at least one snapshot");
  const Matrix z = chol_lower ? Matrix(chol_lower->transpose() * snapshots) : snapshots;
  Eigen::BDCSVD<Matrix> svd(z, Eigen::ComputeThinU);
  PodResult res;
  res.singular_values = svd.singularValues();
  const Vector& s = res.singular_values;
  int nr = 0;
  if (s.size() > 0 && s[0] > 0.0)
    while (nr < s.size() && s[nr] > kRankTol * s[0]) ++nr;
  res.numerical_rank = nr;
  const int r = select_rank(s, nr, rule, res.truncated);
  const Matrix u = svd.matrixU().leftCols(r);
  if (chol_lower) {
    const Matrix basis = chol_lower->transpose().triangularView<Eigen::Upper>().solve(u);
    res.basis = orthonormalize(Matrix(basis.rows(), 0), basis, *gram, 0.0);
  } else {
    res.basis = u;
  }
  return res;
}

}  // namespace

PodResult pod(const Matrix& snapshots, const SymBandMatrix& gram, const PodRule& rule) {
  if (static_cast<std::size_t>(snapshots.rows()) != gram.size())
    throw std::invalid_argument("pod: snapshot/gram size mismatch");
  Eigen::LLT<Matrix> llt(gram.dense());
  if (llt.info() != Eigen::Success) throw std::invalid_argument("pod: gram not positive definite");
  const Matrix l = llt.matrixL();
  return pod_impl(snapshots, &l, &gram, rule);
}

PodResult pod(const Matrix& snapshots, const PodRule& rule) {
  return pod_impl(snapshots, nullptr, nullptr, rule);
}

Matrix orthonormalize(const Matrix& fixed, const Matrix& candidates, const SymBandMatrix& gram,
                      double drop_tol) {
  if (fixed.cols() > 0 && fixed.rows() != candidates.rows())
    throw std::invalid_argument("orthonormalize: row mismatch");
  const Matrix s_fixed = fixed.cols() > 0 ? Matrix(gram * fixed) : Matrix();
  Matrix kept(candidates.rows(), candidates.cols());
  Matrix s_kept(candidates.rows(), candidates.cols());
  int count = 0;
  for (Eigen::Index c = 0; c < candidates.cols(); ++c) {
    Vector v = candidates.col(c);
    const double norm0 = std::sqrt(std::max(gram.quadratic_form(v), 0.0));
    if (!(norm0 > 0.0)) continue;
    for (int pass = 0; pass < 2; ++pass) {
      if (fixed.cols() > 0) v -= fixed * (s_fixed.transpose() * v);
      if (count > 0) v -= kept.leftCols(count) * (s_kept.leftCols(count).transpose() * v);
    }
    const Vector sv = gram * v;
    const double norm = std::sqrt(std::max(v.dot(sv), 0.0));
    if (norm == 0.0 || !(norm > drop_tol * norm0)) continue;
    kept.col(count) = v / norm;
    s_kept.col(count) = sv / norm;
    ++count;
  }
  return kept.leftCols(count);
}

}  // namespace hrb
