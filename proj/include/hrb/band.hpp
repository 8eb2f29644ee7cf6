#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

namespace hrb {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Symmetric band matrix stored by its upper diagonals; symmetric by construction.
class SymBandMatrix {
 public:
  SymBandMatrix() = default;
  SymBandMatrix(std::size_t n, std::size_t bandwidth);

  std::size_t size() const noexcept { return n_; }
  std::size_t bandwidth() const noexcept { return bw_; }

  /// A(i, j); zero outside the band.
  double operator()(std::size_t i, std::size_t j) const;
  /// Adds v to A(i, j) and, implicitly, A(j, i).
  void add(std::size_t i, std::size_t j, double v);

  void apply(std::span<const double> x, std::span<double> out) const;
  Vector operator*(const Vector& x) const;
  /// Column-wise product A X.
  Matrix operator*(const Matrix& x) const;
  double quadratic_form(const Vector& x) const;

  /// Principal submatrix with the first \p offset rows and columns removed.
  SymBandMatrix trailing(std::size_t offset) const;
  SymBandMatrix operator+(const SymBandMatrix& other) const;
  SymBandMatrix operator*(double s) const;
  Matrix dense() const;

  std::span<const double> bands() const noexcept { return bands_; }

 private:
  std::size_t n_ = 0;
  std::size_t bw_ = 0;
  std::vector<double> bands_;  // bands_[d * n + i] = A(i, i + d)
};

/// LU factorisation (partial pivoting) of a general band matrix.
class BandLU {
 public:
  BandLU() = default;
  BandLU(std::size_t n, std::size_t kl, std::size_t ku);

  std::size_t size() const noexcept { return n_; }
  void set_zero();
  void add(std::size_t i, std::size_t j, double v);
  /// Throws SingularSystem on a zero pivot.
  void factorize();
  void solve(std::span<double> rhs) const;
  void solve(Matrix& rhs) const;

 private:
  std::size_t n_ = 0, kl_ = 0, ku_ = 0, ldab_ = 0;
  std::vector<double> ab_;
  std::vector<int> ipiv_;
  bool factored_ = false;
};

/// Cholesky factorisation of a symmetric positive definite band matrix.
class SymBandCholesky {
 public:
  /// Throws SingularSystem if the matrix is not positive definite.
  explicit SymBandCholesky(const SymBandMatrix& a);
  Vector solve(const Vector& rhs) const;

 private:
  std::size_t n_, bw_;
  std::vector<double> ab_;
};

}  // namespace hrb
