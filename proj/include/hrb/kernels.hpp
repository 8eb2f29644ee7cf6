#pragma once

// Data-parallel inner loops shared by the full- and reduced-order solvers.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2/FMA variant. The variant is chosen once at startup from CPUID and can
// be overridden with the environment variable HRB_SIMD=scalar|avx2 or with
// set_isa() (tests use this to compare both paths).

#include <cstddef>
#include <span>
#include <string_view>

namespace hrb::kernels {

enum class Isa { scalar, avx2 };

bool isa_supported(Isa isa);
Isa active_isa();
/// Throws std::invalid_argument if the CPU cannot run \p isa.
void set_isa(Isa isa);
std::string_view isa_name(Isa isa);

/// Nodal evaluation of f(y, q) = sqrt(y) sinh(q) and its partial derivatives
/// at max(y, y_floor). Any of the output spans may be empty to skip it.
void sqrt_sinh(std::span<const double> y, std::span<const double> q, double y_floor,
               std::span<double> f, std::span<double> df_dy, std::span<double> df_dq);

double dot(std::span<const double> a, std::span<const double> b);

/// out = A x for a symmetric band matrix stored by upper diagonals:
/// bands[d * n + i] = A(i, i + d) for d = 0..bandwidth (unused tail entries ignored).
void sym_band_matvec(std::size_t n, std::size_t bandwidth, std::span<const double> bands,
                     std::span<const double> x, std::span<double> out);

namespace detail {

struct KernelTable {
  void (*sqrt_sinh)(std::size_t, const double*, const double*, double, double*, double*,
                    double*);
  double (*dot)(std::size_t, const double*, const double*);
  void (*sym_band_matvec)(std::size_t, std::size_t, const double*, const double*, double*);
};

const KernelTable& scalar_table();
#if defined(HRB_HAVE_AVX2_TU)
const KernelTable& avx2_table();
#endif

}  // namespace detail
}  // namespace hrb::kernels
