#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "hrb/band.hpp"
#include "hrb/kernels.hpp"

using namespace hrb;
namespace k = hrb::kernels;

namespace {

struct IsaGuard {
  k::Isa saved = k::active_isa();
  ~IsaGuard() { k::set_isa(saved); }
};

std::vector<double> uniform(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("sqrt_sinh matches the closed form on every code path") {
  IsaGuard guard;
  std::mt19937_64 rng(11);
  for (k::Isa isa : {k::Isa::scalar, k::Isa::avx2}) {
    if (!k::isa_supported(isa)) continue;
    k::set_isa(isa);
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 17u, 256u}) {
      auto y = uniform(rng, n, -0.5, 8.0);
      auto q = uniform(rng, n, -30.0, 30.0);
      if (n > 2) q[1] = 0.0, q[2] = 705.0, y[2] = 1.0;
      std::vector<double> f(n), dy(n), dq(n);
      k::sqrt_sinh(y, q, 1e-12, f, dy, dq);
      for (std::size_t i = 0; i < n; ++i) {
        const double s = std::sqrt(std::max(y[i], 1e-12));
        CHECK(rel_diff(f[i], s * std::sinh(q[i])) <= 4e-15 * std::max(1.0, std::abs(std::sinh(q[i]))));
        CHECK(rel_diff(dq[i], s * std::cosh(q[i])) <= 4e-15 * std::max(1.0, std::cosh(q[i])));
        CHECK(rel_diff(dy[i], std::sinh(q[i]) / (2 * s)) <=
              4e-15 * std::max(1.0, std::abs(std::sinh(q[i]) / (2 * s))));
      }
    }
  }
}

TEST_CASE("sqrt_sinh skips empty outputs") {
  std::vector<double> y{1.0, 4.0}, q{0.5, -0.5}, f(2);
  k::sqrt_sinh(y, q, 1e-12, f, {}, {});
  CHECK(f[1] == doctest::Approx(2.0 * std::sinh(-0.5)).epsilon(1e-15));
}

TEST_CASE("SIMD and scalar kernels agree") {
  if (!k::isa_supported(k::Isa::avx2)) return;
  IsaGuard guard;
  std::mt19937_64 rng(12);
  for (std::size_t n : {1u, 7u, 8u, 9u, 64u, 203u}) {
    const auto a = uniform(rng, n, -1, 1), b = uniform(rng, n, -1, 1);
    k::set_isa(k::Isa::scalar);
    const double ds = k::dot(a, b);
    k::set_isa(k::Isa::avx2);
    const double dv = k::dot(a, b);
    double abs_sum = 0;
    for (std::size_t i = 0; i < n; ++i) abs_sum += std::abs(a[i] * b[i]);
    CHECK(std::abs(ds - dv) <= 1e-15 * abs_sum * static_cast<double>(n));

    for (std::size_t bw : {0u, 1u, 2u, 3u}) {
      const auto bands = uniform(rng, n * (bw + 1), -1, 1);
      std::vector<double> os(n), ov(n);
      k::set_isa(k::Isa::scalar);
      k::sym_band_matvec(n, bw, bands, a, os);
      k::set_isa(k::Isa::avx2);
      k::sym_band_matvec(n, bw, bands, a, ov);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(os[i] - ov[i]) <= 1e-14);
    }

    const auto y = uniform(rng, n, 0.1, 10), q = uniform(rng, n, -5, 5);
    std::vector<double> fs(n), fv(n), gs(n), gv(n), hs(n), hv(n);
    k::set_isa(k::Isa::scalar);
    k::sqrt_sinh(y, q, 1e-12, fs, gs, hs);
    k::set_isa(k::Isa::avx2);
    k::sqrt_sinh(y, q, 1e-12, fv, gv, hv);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(rel_diff(fv[i], fs[i]) <= 1e-14 * std::max(1.0, std::abs(fs[i])));
      CHECK(rel_diff(gv[i], gs[i]) <= 1e-14 * std::max(1.0, std::abs(gs[i])));
      CHECK(rel_diff(hv[i], hs[i]) <= 1e-14 * std::max(1.0, std::abs(hs[i])));
    }
  }
}

TEST_CASE("set_isa rejects unsupported instruction sets") {
  CHECK(k::isa_name(k::Isa::scalar) == "scalar");
  if (!k::isa_supported(k::Isa::avx2)) CHECK_THROWS_AS(k::set_isa(k::Isa::avx2), std::invalid_argument);
}

TEST_CASE("band matrix product matches its dense form") {
  std::mt19937_64 rng(13);
  SymBandMatrix a(9, 2);
  std::uniform_real_distribution<double> d(-1, 1);
  for (std::size_t i = 0; i < 9; ++i)
    for (std::size_t j = i; j < std::min<std::size_t>(9, i + 3); ++j) a.add(i, j, d(rng));
  Vector x(9);
  for (int i = 0; i < 9; ++i) x[i] = d(rng);
  const Matrix dense = a.dense();
  CHECK((dense - dense.transpose()).norm() == 0.0);
  CHECK((a * x - dense * x).norm() <= 1e-14);
  CHECK(a.quadratic_form(x) == doctest::Approx(x.dot(dense * x)).epsilon(1e-14));
  CHECK((a.trailing(1).dense() - dense.bottomRightCorner(8, 8)).norm() == 0.0);
}

TEST_CASE("band solvers match dense factorizations") {
  SymBandMatrix a(6, 1);
  for (std::size_t i = 0; i < 6; ++i) a.add(i, i, 4.0);
  for (std::size_t i = 0; i + 1 < 6; ++i) a.add(i, i + 1, -1.0);
  Vector b = Vector::LinSpaced(6, 1, 6);
  const Vector ref = a.dense().ldlt().solve(b);
  CHECK((SymBandCholesky(a).solve(b) - ref).norm() <= 1e-13);

  BandLU lu(6, 1, 2);
  Matrix dense = Matrix::Zero(6, 6);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = (i > 0 ? i - 1 : 0); j < std::min<std::size_t>(6, i + 3); ++j) {
      const double v = 1.0 / (1.0 + static_cast<double>(i + 2 * j)) + (i == j ? 3.0 : 0.0);
      lu.add(i, j, v);
      dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  lu.factorize();
  Vector x = b;
  lu.solve(std::span<double>(x.data(), 6));
  CHECK((dense * x - b).norm() <= 1e-13);
}
