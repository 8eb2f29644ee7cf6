#include "hrb/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace hrb::kernels::detail {
namespace {

void sqrt_sinh_scalar(std::size_t n, const double* y, const double* q, double floor, double* f,
                      double* dfy, double* dfq) {
  for (std::size_t i = 0; i < n; ++i) {
    const double s = std::sqrt(std::max(y[i], floor));
    const double sh = std::sinh(q[i]);
    if (f) f[i] = s * sh;
    if (dfy) dfy[i] = sh / (2.0 * s);
    if (dfq) dfq[i] = s * std::cosh(q[i]);
  }
}

double dot_scalar(std::size_t n, const double* a, const double* b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void sym_band_matvec_scalar(std::size_t n, std::size_t bw, const double* bands, const double* x,
                            double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = bands[i] * x[i];
  for (std::size_t d = 1; d <= bw && d < n; ++d) {
    const double* b = bands + d * n;
    for (std::size_t i = 0; i + d < n; ++i) {
      out[i] += b[i] * x[i + d];
      out[i + d] += b[i] * x[i];
    }
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{&sqrt_sinh_scalar, &dot_scalar, &sym_band_matvec_scalar};
  return table;
}

}  // namespace hrb::kernels::detail
