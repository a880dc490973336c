// AVX2/FMA kernels. Bit-identical to the scalar reference: same 4-lane
// accumulation, same lane-combine order, same exp algorithm and constants.
// Compiled with -mavx2 -mfma; execution is gated by runtime dispatch.

#include <cmath>
#include <cstdint>
#include <limits>

#include <immintrin.h>

#include "fgw/kern/math.hpp"
#include "table.hpp"

namespace fgw::kern::detail {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

inline double max2(double a, double b) noexcept { return a > b ? a : b; }
inline double min2(double a, double b) noexcept { return a < b ? a : b; }

// combine [l0,l1,l2,l3] as op(op(l0,l2), op(l1,l3)), matching scalar.cpp
inline void split_combine(__m256d acc, __m128d* pair) noexcept {
  const __m128d lo = _mm256_castpd256_pd128(acc);
  const __m128d hi = _mm256_extractf128_pd(acc, 1);
  pair[0] = lo;
  pair[1] = hi;
}

inline double hmax(__m256d acc) noexcept {
  __m128d p[2];
  split_combine(acc, p);
  const __m128d m = _mm_max_pd(p[0], p[1]);  // [max(l0,l2), max(l1,l3)]
  const double c0 = _mm_cvtsd_f64(m);
  const double c1 = _mm_cvtsd_f64(_mm_unpackhi_pd(m, m));
  return max2(c0, c1);
}

inline double hmin(__m256d acc) noexcept {
  __m128d p[2];
  split_combine(acc, p);
  const __m128d m = _mm_min_pd(p[0], p[1]);
  const double c0 = _mm_cvtsd_f64(m);
  const double c1 = _mm_cvtsd_f64(_mm_unpackhi_pd(m, m));
  return min2(c0, c1);
}

inline double hsum(__m256d acc) noexcept {
  __m128d p[2];
  split_combine(acc, p);
  const __m128d s = _mm_add_pd(p[0], p[1]);  // [l0+l2, l1+l3]
  const double c0 = _mm_cvtsd_f64(s);
  const double c1 = _mm_cvtsd_f64(_mm_unpackhi_pd(s, s));
  return c0 + c1;
}

// vectorized kern::exp_d; see kern/math.hpp for the algorithm
inline __m256d exp_pd(__m256d x) noexcept {
  const __m256d xc =
      _mm256_min_pd(_mm256_max_pd(x, _mm256_set1_pd(-746.0)),
                    _mm256_set1_pd(710.0));
  const __m256d k = _mm256_round_pd(
      _mm256_mul_pd(xc, _mm256_set1_pd(kLog2E)),
      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fmadd_pd(k, _mm256_set1_pd(-kLn2Hi), xc);
  r = _mm256_fmadd_pd(k, _mm256_set1_pd(-kLn2Lo), r);

  __m256d p = _mm256_set1_pd(kExpC[11]);
  for (int i = 10; i >= 0; --i)
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(kExpC[i]));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));

  const __m128i k32 = _mm256_cvtpd_epi32(k);  // k is integral, conversion exact
  const __m256i k64 = _mm256_cvtepi32_epi64(k32);
  const __m256i kp = _mm256_add_epi64(k64, _mm256_set1_epi64x(1075));
  const __m256i k1 = _mm256_srli_epi64(kp, 1);
  const __m256i k2 = _mm256_sub_epi64(kp, k1);
  const __m256i e1 =
      _mm256_slli_epi64(_mm256_add_epi64(k1, _mm256_set1_epi64x(1023 - 537)), 52);
  const __m256i e2 =
      _mm256_slli_epi64(_mm256_add_epi64(k2, _mm256_set1_epi64x(1023 - 538)), 52);
  __m256d res = _mm256_mul_pd(_mm256_mul_pd(p, _mm256_castsi256_pd(e1)),
                              _mm256_castsi256_pd(e2));

  const __m256d lo_mask =
      _mm256_cmp_pd(x, _mm256_set1_pd(kExpUnderflow), _CMP_LE_OQ);
  const __m256d hi_mask =
      _mm256_cmp_pd(x, _mm256_set1_pd(kExpOverflow), _CMP_GT_OQ);
  res = _mm256_andnot_pd(lo_mask, res);
  res = _mm256_blendv_pd(res, _mm256_set1_pd(kInf), hi_mask);
  return res;
}

double v_reduce_max(const double* x, std::size_t n) {
  __m256d acc = _mm256_set1_pd(-kInf);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_max_pd(acc, _mm256_loadu_pd(x + i));
  double r = hmax(acc);
  for (; i < n; ++i) r = max2(r, x[i]);
  return r;
}

void v_reduce_minmax(const double* x, std::size_t n, double* lo, double* hi) {
  __m256d amin = _mm256_set1_pd(kInf);
  __m256d amax = _mm256_set1_pd(-kInf);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    amin = _mm256_min_pd(amin, v);
    amax = _mm256_max_pd(amax, v);
  }
  double mn = hmin(amin);
  double mx = hmax(amax);
  for (; i < n; ++i) {
    mn = min2(mn, x[i]);
    mx = max2(mx, x[i]);
  }
  *lo = mn;
  *hi = mx;
}

double v_sum(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double r = hsum(acc);
  for (; i < n; ++i) r += x[i];
  return r;
}

double v_dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  double r = hsum(acc);
  for (; i < n; ++i) r = std::fma(a[i], b[i], r);
  return r;
}

double v_lse(const double* x, std::size_t n) {
  if (n == 0) return -kInf;
  const double m = v_reduce_max(x, n);
  if (std::isinf(m)) return m;
  const __m256d vm = _mm256_set1_pd(m);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_add_pd(acc, exp_pd(_mm256_sub_pd(_mm256_loadu_pd(x + i), vm)));
  double s = hsum(acc);
  for (; i < n; ++i) s += exp_d(x[i] - m);
  return m + log_d(s);
}

double v_lse_add(const double* x, const double* y, std::size_t n) {
  if (n == 0) return -kInf;
  __m256d amax = _mm256_set1_pd(-kInf);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d s = _mm256_add_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    amax = _mm256_max_pd(amax, s);
  }
  double m = hmax(amax);
  for (; i < n; ++i) m = max2(m, x[i] + y[i]);
  if (std::isinf(m)) return m;
  const __m256d vm = _mm256_set1_pd(m);
  __m256d acc = _mm256_setzero_pd();
  i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d s = _mm256_add_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    acc = _mm256_add_pd(acc, exp_pd(_mm256_sub_pd(s, vm)));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += exp_d((x[i] + y[i]) - m);
  return m + log_d(s);
}

void v_exp_add_scale(const double* x, const double* y, double c, double* out,
                     std::size_t n) {
  const __m256d vc = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d s = _mm256_add_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(out + i, exp_pd(_mm256_add_pd(s, vc)));
  }
  for (; i < n; ++i) out[i] = exp_d((x[i] + y[i]) + c);
}

void v_abs_diff_add(double s, const double* x, double* out, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(s);
  const __m256d sign = _mm256_set1_pd(-0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(vs, _mm256_loadu_pd(x + i));
    const __m256d a = _mm256_andnot_pd(sign, d);
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(out + i), a));
  }
  for (; i < n; ++i) out[i] += std::fabs(s - x[i]);
}

void v_axpby(double alpha, const double* x, double beta, const double* y,
             double* out, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  const __m256d vb = _mm256_set1_pd(beta);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d t = _mm256_mul_pd(vb, _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(out + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), t));
  }
  for (; i < n; ++i) out[i] = std::fma(alpha, x[i], beta * y[i]);
}

void v_sub_div(const double* x, double lo, double den, double* out,
               std::size_t n) {
  const __m256d vlo = _mm256_set1_pd(lo);
  const __m256d vd = _mm256_set1_pd(den);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i,
                     _mm256_div_pd(_mm256_sub_pd(_mm256_loadu_pd(x + i), vlo), vd));
  for (; i < n; ++i) out[i] = (x[i] - lo) / den;
}

}  // namespace

const KernelTable& avx2_table() noexcept {
  static const KernelTable t = {
      v_reduce_max, v_reduce_minmax, v_sum,          v_dot,
      v_lse,        v_lse_add,       v_exp_add_scale, v_abs_diff_add,
      v_axpby,      v_sub_div,
  };
  return t;
}

}  // namespace fgw::kern::detail
