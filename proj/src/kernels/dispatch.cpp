#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "hrb/kernels.hpp"

namespace hrb::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(HRB_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa initial_isa() {
  if (const char* env = std::getenv("HRB_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return Isa::scalar;
    if (v == "avx2" && cpu_has_avx2()) return Isa::avx2;
  }
  return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

const detail::KernelTable& table() {
#if defined(HRB_HAVE_AVX2_TU)
  if (current().load(std::memory_order_relaxed) == Isa::avx2) return detail::avx2_table();
#endif
  return detail::scalar_table();
}

}  // namespace

bool isa_supported(Isa isa) { return isa == Isa::scalar || cpu_has_avx2(); }

Isa active_isa() { return current().load(); }

void set_isa(Isa isa) {
  if (!isa_supported(isa))
    throw std::invalid_argument("kernel ISA not supported on this CPU: " +
                                std::string(isa_name(isa)));
  current().store(isa);
}

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

void sqrt_sinh(std::span<const double> y, std::span<const double> q, double y_floor,
               std::span<double> f, std::span<double> df_dy, std::span<double> df_dq) {
  const std::size_t n = y.size();
  if (q.size() != n || (!f.empty() && f.size() != n) || (!df_dy.empty() && df_dy.size() != n) ||
      (!df_dq.empty() && df_dq.size() != n))
    throw std::invalid_argument("sqrt_sinh: size mismatch");
  table().sqrt_sinh(n, y.data(), q.data(), y_floor, f.empty() ? nullptr : f.data(),
                    df_dy.empty() ? nullptr : df_dy.data(),
                    df_dq.empty() ? nullptr : df_dq.data());
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  return table().dot(a.size(), a.data(), b.data());
}

void sym_band_matvec(std::size_t n, std::size_t bandwidth, std::span<const double> bands,
                     std::span<const double> x, std::span<double> out) {
  if (bands.size() < (bandwidth + 1) * n || x.size() != n || out.size() != n)
    throw std::invalid_argument("sym_band_matvec: size mismatch");
  table().sym_band_matvec(n, bandwidth, bands.data(), x.data(), out.data());
}

}  // namespace hrb::kernels
