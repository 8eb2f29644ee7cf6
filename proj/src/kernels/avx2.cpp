// AVX2 + FMA variants. This translation unit is compiled with -mavx2 -mfma and
// must only be entered after the dispatcher has checked CPUID.

#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "hrb/kernels.hpp"

namespace hrb::kernels::detail {
namespace {

// exp(x) for |x| <= 708: Cody-Waite reduction by ln 2 and a degree-13 Taylor
// polynomial on |r| <= ln(2)/2 (truncation error below 1e-17 relative).
inline __m256d exp_pd(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634074);
  const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
  const __m256d n =
      _mm256_round_pd(_mm256_mul_pd(x, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, ln2_hi, x);
  r = _mm256_fnmadd_pd(n, ln2_lo, r);

  static constexpr double inv_fact[] = {
      1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0,
      1.0 / 362880.0,     1.0 / 40320.0,     1.0 / 5040.0,     1.0 / 720.0,
      1.0 / 120.0,        1.0 / 24.0,        1.0 / 6.0,        0.5,
      1.0,                1.0};
  __m256d p = _mm256_set1_pd(inv_fact[0]);
  for (int k = 1; k < 14; ++k) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(inv_fact[k]));

  __m256i e = _mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(n));
  e = _mm256_slli_epi64(_mm256_add_epi64(e, _mm256_set1_epi64x(1023)), 52);
  return _mm256_mul_pd(p, _mm256_castsi256_pd(e));
}

// sinh on |a| < 1 by its odd series through a^17.
inline __m256d sinh_small_pd(__m256d a) {
  static constexpr double c[] = {1.0 / 355687428096000.0, 1.0 / 1307674368000.0,
                                 1.0 / 6227020800.0,      1.0 / 39916800.0,
                                 1.0 / 362880.0,          1.0 / 5040.0,
                                 1.0 / 120.0,             1.0 / 6.0,
                                 1.0};
  const __m256d a2 = _mm256_mul_pd(a, a);
  __m256d p = _mm256_set1_pd(c[0]);
  for (int k = 1; k < 9; ++k) p = _mm256_fmadd_pd(p, a2, _mm256_set1_pd(c[k]));
  return _mm256_mul_pd(p, a);
}

void sqrt_sinh_avx2(std::size_t n, const double* y, const double* q, double floor, double* f,
                    double* dfy, double* dfq) {
  const __m256d vfloor = _mm256_set1_pd(floor);
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d big = _mm256_set1_pd(700.0);
  const __m256d sign_mask = _mm256_set1_pd(-0.0);

  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vq = _mm256_loadu_pd(q + i);
    const __m256d a = _mm256_andnot_pd(sign_mask, vq);
    if (_mm256_movemask_pd(_mm256_cmp_pd(a, big, _CMP_GT_OQ)) != 0) {
      scalar_table().sqrt_sinh(4, y + i, q + i, floor, f ? f + i : nullptr,
                               dfy ? dfy + i : nullptr, dfq ? dfq + i : nullptr);
      continue;
    }
    const __m256d s = _mm256_sqrt_pd(_mm256_max_pd(_mm256_loadu_pd(y + i), vfloor));
    const __m256d e = exp_pd(a);
    const __m256d ei = _mm256_div_pd(one, e);
    const __m256d sh_big = _mm256_mul_pd(half, _mm256_sub_pd(e, ei));
    const __m256d small = _mm256_cmp_pd(a, one, _CMP_LT_OQ);
    __m256d sh = _mm256_blendv_pd(sh_big, sinh_small_pd(a), small);
    sh = _mm256_or_pd(sh, _mm256_and_pd(sign_mask, vq));
    if (f) _mm256_storeu_pd(f + i, _mm256_mul_pd(s, sh));
    if (dfy) _mm256_storeu_pd(dfy + i, _mm256_div_pd(sh, _mm256_add_pd(s, s)));
    if (dfq) {
      const __m256d ch = _mm256_mul_pd(half, _mm256_add_pd(e, ei));
      _mm256_storeu_pd(dfq + i, _mm256_mul_pd(s, ch));
    }
  }
  if (i < n)
    scalar_table().sqrt_sinh(n - i, y + i, q + i, floor, f ? f + i : nullptr,
                             dfy ? dfy + i : nullptr, dfq ? dfq + i : nullptr);
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(std::size_t n, const double* a, const double* b) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void sym_band_matvec_avx2(std::size_t n, std::size_t bw, const double* bands, const double* x,
                          double* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(bands + i), _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = bands[i] * x[i];

  for (std::size_t d = 1; d <= bw && d < n; ++d) {
    const double* b = bands + d * n;
    const std::size_t m = n - d;
    // Upper part: out[i] += A(i, i+d) x[i+d].
    i = 0;
    for (; i + 4 <= m; i += 4) {
      const __m256d acc = _mm256_loadu_pd(out + i);
      _mm256_storeu_pd(out + i,
                       _mm256_fmadd_pd(_mm256_loadu_pd(b + i), _mm256_loadu_pd(x + i + d), acc));
    }
    for (; i < m; ++i) out[i] += b[i] * x[i + d];
    // Lower part: out[i+d] += A(i, i+d) x[i].
    i = 0;
    for (; i + 4 <= m; i += 4) {
      const __m256d acc = _mm256_loadu_pd(out + i + d);
      _mm256_storeu_pd(out + i + d,
                       _mm256_fmadd_pd(_mm256_loadu_pd(b + i), _mm256_loadu_pd(x + i), acc));
    }
    for (; i < m; ++i) out[i + d] += b[i] * x[i];
  }
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{&sqrt_sinh_avx2, &dot_avx2, &sym_band_matvec_avx2};
  return table;
}

}  // namespace hrb::kernels::detail
