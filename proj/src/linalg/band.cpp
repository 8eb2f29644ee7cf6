#include "hrb/band.hpp"

#include <lapacke.h>

#include <algorithm>
#include <stdexcept>
#include <string>

#include "hrb/errors.hpp"
#include "hrb/kernels.hpp"

namespace hrb {

SymBandMatrix::SymBandMatrix(std::size_t n, std::size_t bandwidth)
    : n_(n), bw_(bandwidth), bands_((bandwidth + 1) * n, 0.0) {}

double SymBandMatrix::operator()(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  const std::size_t d = j - i;
  return d > bw_ ? 0.0 : bands_[d * n_ + i];
}

void SymBandMatrix::add(std::size_t i, std::size_t j, double v) {
  if (i > j) std::swap(i, j);
  const std::size_t d = j - i;
  if (d > bw_ || j >= n_) throw std::out_of_range("SymBandMatrix::add outside band");
  bands_[d * n_ + i] += v;
}

void SymBandMatrix::apply(std::span<const double> x, std::span<double> out) const {
  kernels::sym_band_matvec(n_, bw_, bands_, x, out);
}

Vector SymBandMatrix::operator*(const Vector& x) const {
  Vector out(n_);
  apply({x.data(), static_cast<std::size_t>(x.size())}, {out.data(), n_});
  return out;
}

Matrix SymBandMatrix::operator*(const Matrix& x) const {
  if (static_cast<std::size_t>(x.rows()) != n_)
    throw std::invalid_argument("SymBandMatrix * Matrix: row mismatch");
  Matrix out(n_, x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) apply({x.col(c).data(), n_}, {out.col(c).data(), n_});
  return out;
}

double SymBandMatrix::quadratic_form(const Vector& x) const {
  const Vector ax = *this * x;
  return kernels::dot({x.data(), n_}, {ax.data(), n_});
}

SymBandMatrix SymBandMatrix::trailing(std::size_t offset) const {
  if (offset > n_) throw std::invalid_argument("SymBandMatrix::trailing: offset too large");
  SymBandMatrix out(n_ - offset, bw_);
  for (std::size_t d = 0; d <= bw_; ++d)
    for (std::size_t i = 0; i + offset < n_; ++i)
      out.bands_[d * out.n_ + i] = bands_[d * n_ + i + offset];
  return out;
}

SymBandMatrix SymBandMatrix::operator+(const SymBandMatrix& other) const {
  if (other.n_ != n_) throw std::invalid_argument("SymBandMatrix +: size mismatch");
  SymBandMatrix out(n_, std::max(bw_, other.bw_));
  for (std::size_t d = 0; d <= bw_; ++d)
    for (std::size_t i = 0; i < n_; ++i) out.bands_[d * n_ + i] += bands_[d * n_ + i];
  for (std::size_t d = 0; d <= other.bw_; ++d)
    for (std::size_t i = 0; i < n_; ++i) out.bands_[d * n_ + i] += other.bands_[d * n_ + i];
  return out;
}

SymBandMatrix SymBandMatrix::operator*(double s) const {
  SymBandMatrix out = *this;
  for (double& v : out.bands_) v *= s;
  return out;
}

Matrix SymBandMatrix::dense() const {
  Matrix out = Matrix::Zero(n_, n_);
  for (std::size_t d = 0; d <= bw_; ++d)
    for (std::size_t i = 0; i + d < n_; ++i) {
      out(i, i + d) = bands_[d * n_ + i];
      out(i + d, i) = bands_[d * n_ + i];
    }
  return out;
}

BandLU::BandLU(std::size_t n, std::size_t kl, std::size_t ku)
    : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1), ab_(ldab_ * n, 0.0), ipiv_(n, 0) {}

void BandLU::set_zero() {
  std::fill(ab_.begin(), ab_.end(), 0.0);
  factored_ = false;
}

void BandLU::add(std::size_t i, std::size_t j, double v) {
  if (i + ku_ < j || j + kl_ < i) throw std::out_of_range("BandLU::add outside band");
  ab_[(kl_ + ku_ + i - j) + j * ldab_] += v;
}

void BandLU::factorize() {
  const lapack_int info =
      LAPACKE_dgbtrf(LAPACK_COL_MAJOR, static_cast<lapack_int>(n_), static_cast<lapack_int>(n_),
                     static_cast<lapack_int>(kl_), static_cast<lapack_int>(ku_), ab_.data(),
                     static_cast<lapack_int>(ldab_), ipiv_.data());
  if (info != 0)
    throw SingularSystem("band LU failed (dgbtrf info=" + std::to_string(info) + ")");
  factored_ = true;
}

void BandLU::solve(std::span<double> rhs) const {
  if (!factored_) throw std::logic_error("BandLU::solve before factorize");
  if (rhs.size() != n_) throw std::invalid_argument("BandLU::solve: size mismatch");
  LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', static_cast<lapack_int>(n_), static_cast<lapack_int>(kl_),
                 static_cast<lapack_int>(ku_), 1, ab_.data(), static_cast<lapack_int>(ldab_),
                 ipiv_.data(), rhs.data(), static_cast<lapack_int>(n_));
}

void BandLU::solve(Matrix& rhs) const {
  if (!factored_) throw std::logic_error("BandLU::solve before factorize");
  if (static_cast<std::size_t>(rhs.rows()) != n_)
    throw std::invalid_argument("BandLU::solve: size mismatch");
  LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', static_cast<lapack_int>(n_), static_cast<lapack_int>(kl_),
                 static_cast<lapack_int>(ku_), static_cast<lapack_int>(rhs.cols()), ab_.data(),
                 static_cast<lapack_int>(ldab_), ipiv_.data(), rhs.data(),
                 static_cast<lapack_int>(n_));
}

SymBandCholesky::SymBandCholesky(const SymBandMatrix& a)
    : n_(a.size()), bw_(a.bandwidth()), ab_((a.bandwidth() + 1) * a.size(), 0.0) {
  const std::size_t ld = bw_ + 1;
  for (std::size_t j = 0; j < n_; ++j)
    for (std::size_t i = (j > bw_ ? j - bw_ : 0); i <= j; ++i) ab_[(bw_ + i - j) + j * ld] = a(i, j);
  const lapack_int info =
      LAPACKE_dpbtrf(LAPACK_COL_MAJOR, 'U', static_cast<lapack_int>(n_),
                     static_cast<lapack_int>(bw_), ab_.data(), static_cast<lapack_int>(ld));
  if (info != 0)
    throw SingularSystem("band Cholesky failed, matrix not positive definite (info=" +
                         std::to_string(info) + ")");
}

Vector SymBandCholesky::solve(const Vector& rhs) const {
  if (static_cast<std::size_t>(rhs.size()) != n_)
    throw std::invalid_argument("SymBandCholesky::solve: size mismatch");
  Vector x = rhs;
  LAPACKE_dpbtrs(LAPACK_COL_MAJOR, 'U', static_cast<lapack_int>(n_), static_cast<lapack_int>(bw_), 1,
                 ab_.data(), static_cast<lapack_int>(bw_ + 1), x.data(),
                 static_cast<lapack_int>(n_));
  return x;
}

}  // namespace hrb
