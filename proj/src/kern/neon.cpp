// NEON kernels (aarch64). Two float64x2 accumulators stand in for the four
// strided lanes, so accumulation and combine order match scalar.cpp and
// avx2.cpp bit for bit. Comparison-select is used instead of vmaxq/vminq to
// reproduce the reference ternary exactly around signed zeros.

#if defined(__aarch64__) && defined(__ARM_NEON)

#include <arm_neon.h>

#include <cmath>
#include <cstdint>
#include <limits>

#include "fgw/kern/math.hpp"
#include "table.hpp"

namespace fgw::kern::detail {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

inline double max2(double a, double b) noexcept { return a > b ? a : b; }
inline double min2(double a, double b) noexcept { return a < b ? a : b; }

inline float64x2_t vmax2(float64x2_t a, float64x2_t b) noexcept {
  return vbslq_f64(vcgtq_f64(a, b), a, b);  // a > b ? a : b
}
inline float64x2_t vmin2(float64x2_t a, float64x2_t b) noexcept {
  return vbslq_f64(vcltq_f64(a, b), a, b);
}

// [l0,l1] op [l2,l3] -> op(op(l0,l2), op(l1,l3))
inline double hmax(float64x2_t a, float64x2_t b) noexcept {
  const float64x2_t m = vmax2(a, b);
  return max2(vgetq_lane_f64(m, 0), vgetq_lane_f64(m, 1));
}
inline double hmin(float64x2_t a, float64x2_t b) noexcept {
  const float64x2_t m = vmin2(a, b);
  return min2(vgetq_lane_f64(m, 0), vgetq_lane_f64(m, 1));
}
inline double hsum(float64x2_t a, float64x2_t b) noexcept {
  const float64x2_t s = vaddq_f64(a, b);
  return vgetq_lane_f64(s, 0) + vgetq_lane_f64(s, 1);
}

inline float64x2_t exp_pd(float64x2_t x) noexcept {
  const float64x2_t xc =
      vmin2(vmax2(x, vdupq_n_f64(-746.0)), vdupq_n_f64(710.0));
  const float64x2_t k = vrndnq_f64(vmulq_f64(xc, vdupq_n_f64(kLog2E)));
  float64x2_t r = vfmaq_f64(xc, k, vdupq_n_f64(-kLn2Hi));
  r = vfmaq_f64(r, k, vdupq_n_f64(-kLn2Lo));

  float64x2_t p = vdupq_n_f64(kExpC[11]);
  for (int i = 10; i >= 0; --i) p = vfmaq_f64(vdupq_n_f64(kExpC[i]), p, r);
  p = vfmaq_f64(vdupq_n_f64(1.0), p, r);
  p = vfmaq_f64(vdupq_n_f64(1.0), p, r);

  const int64x2_t k64 = vcvtq_s64_f64(k);  // k integral, conversion exact
  const int64x2_t kp = vaddq_s64(k64, vdupq_n_s64(1075));
  const int64x2_t k1 =
      vreinterpretq_s64_u64(vshrq_n_u64(vreinterpretq_u64_s64(kp), 1));
  const int64x2_t k2 = vsubq_s64(kp, k1);
  const float64x2_t s1 = vreinterpretq_f64_s64(
      vshlq_n_s64(vaddq_s64(k1, vdupq_n_s64(1023 - 537)), 52));
  const float64x2_t s2 = vreinterpretq_f64_s64(
      vshlq_n_s64(vaddq_s64(k2, vdupq_n_s64(1023 - 538)), 52));
  float64x2_t res = vmulq_f64(vmulq_f64(p, s1), s2);

  const uint64x2_t lo_mask = vcleq_f64(x, vdupq_n_f64(kExpUnderflow));
  const uint64x2_t hi_mask = vcgtq_f64(x, vdupq_n_f64(kExpOverflow));
  res = vbslq_f64(lo_mask, vdupq_n_f64(0.0), res);
  res = vbslq_f64(hi_mask, vdupq_n_f64(kInf), res);
  return res;
}

double v_reduce_max(const double* x, std::size_t n) {
  float64x2_t a = vdupq_n_f64(-kInf), b = vdupq_n_f64(-kInf);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    a = vmax2(a, vld1q_f64(x + i));
    b = vmax2(b, vld1q_f64(x + i + 2));
  }
  double r = hmax(a, b);
  for (; i < n; ++i) r = max2(r, x[i]);
  return r;
}

void v_reduce_minmax(const double* x, std::size_t n, double* lo, double* hi) {
  float64x2_t amin = vdupq_n_f64(kInf), bmin = vdupq_n_f64(kInf);
  float64x2_t amax = vdupq_n_f64(-kInf), bmax = vdupq_n_f64(-kInf);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float64x2_t v0 = vld1q_f64(x + i);
    const float64x2_t v1 = vld1q_f64(x + i + 2);
    amin = vmin2(amin, v0);
    bmin = vmin2(bmin, v1);
    amax = vmax2(amax, v0);
    bmax = vmax2(bmax, v1);
  }
  double mn = hmin(amin, bmin);
  double mx = hmax(amax, bmax);
  for (; i < n; ++i) {
    mn = min2(mn, x[i]);
    mx = max2(mx, x[i]);
  }
  *lo = mn;
  *hi = mx;
}

double v_sum(const double* x, std::size_t n) {
  float64x2_t a = vdupq_n_f64(0.0), b = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    a = vaddq_f64(a, vld1q_f64(x + i));
    b = vaddq_f64(b, vld1q_f64(x + i + 2));
  }
  double r = hsum(a, b);
  for (; i < n; ++i) r += x[i];
  return r;
}

double v_dot(const double* p, const double* q, std::size_t n) {
  float64x2_t a = vdupq_n_f64(0.0), b = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    a = vfmaq_f64(a, vld1q_f64(p + i), vld1q_f64(q + i));
    b = vfmaq_f64(b, vld1q_f64(p + i + 2), vld1q_f64(q + i + 2));
  }
  double r = hsum(a, b);
  for (; i < n; ++i) r = std::fma(p[i], q[i], r);
  return r;
}

double v_lse(const double* x, std::size_t n) {
  if (n == 0) return -kInf;
  const double m = v_reduce_max(x, n);
  if (std::isinf(m)) return m;
  const float64x2_t vm = vdupq_n_f64(m);
  float64x2_t a = vdupq_n_f64(0.0), b = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    a = vaddq_f64(a, exp_pd(vsubq_f64(vld1q_f64(x + i), vm)));
    b = vaddq_f64(b, exp_pd(vsubq_f64(vld1q_f64(x + i + 2), vm)));
  }
  double s = hsum(a, b);
  for (; i < n; ++i) s += exp_d(x[i] - m);
  return m + log_d(s);
}

double v_lse_add(const double* x, const double* y, std::size_t n) {
  if (n == 0) return -kInf;
  float64x2_t ma = vdupq_n_f64(-kInf), mb = vdupq_n_f64(-kInf);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    ma = vmax2(ma, vaddq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
    mb = vmax2(mb, vaddq_f64(vld1q_f64(x + i + 2), vld1q_f64(y + i + 2)));
  }
  double m = hmax(ma, mb);
  for (; i < n; ++i) m = max2(m, x[i] + y[i]);
  if (std::isinf(m)) return m;
  const float64x2_t vm = vdupq_n_f64(m);
  float64x2_t a = vdupq_n_f64(0.0), b = vdupq_n_f64(0.0);
  i = 0;
  for (; i + 4 <= n; i += 4) {
    const float64x2_t s0 = vaddq_f64(vld1q_f64(x + i), vld1q_f64(y + i));
    const float64x2_t s1 = vaddq_f64(vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
    a = vaddq_f64(a, exp_pd(vsubq_f64(s0, vm)));
    b = vaddq_f64(b, exp_pd(vsubq_f64(s1, vm)));
  }
  double s = hsum(a, b);
  for (; i < n; ++i) s += exp_d((x[i] + y[i]) - m);
  return m + log_d(s);
}

void v_exp_add_scale(const double* x, const double* y, double c, double* out,
                     std::size_t n) {
  const float64x2_t vc = vdupq_n_f64(c);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t s = vaddq_f64(vld1q_f64(x + i), vld1q_f64(y + i));
    vst1q_f64(out + i, exp_pd(vaddq_f64(s, vc)));
  }
  for (; i < n; ++i) out[i] = exp_d((x[i] + y[i]) + c);
}

void v_abs_diff_add(double s, const double* x, double* out, std::size_t n) {
  const float64x2_t vs = vdupq_n_f64(s);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vs, vld1q_f64(x + i));
    vst1q_f64(out + i, vaddq_f64(vld1q_f64(out + i), vabsq_f64(d)));
  }
  for (; i < n; ++i) out[i] += std::fabs(s - x[i]);
}

void v_axpby(double alpha, const double* x, double beta, const double* y,
             double* out, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  const float64x2_t vb = vdupq_n_f64(beta);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t t = vmulq_f64(vb, vld1q_f64(y + i));
    vst1q_f64(out + i, vfmaq_f64(t, va, vld1q_f64(x + i)));
  }
  for (; i < n; ++i) out[i] = std::fma(alpha, x[i], beta * y[i]);
}

void v_sub_div(const double* x, double lo, double den, double* out,
               std::size_t n) {
  const float64x2_t vlo = vdupq_n_f64(lo);
  const float64x2_t vd = vdupq_n_f64(den);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(out + i, vdivq_f64(vsubq_f64(vld1q_f64(x + i), vlo), vd));
  for (; i < n; ++i) out[i] = (x[i] - lo) / den;
}

}  // namespace

const KernelTable& neon_table() noexcept {
  static const KernelTable t = {
      v_reduce_max, v_reduce_minmax, v_sum,          v_dot,
      v_lse,        v_lse_add,       v_exp_add_scale, v_abs_diff_add,
      v_axpby,      v_sub_div,
  };
  return t;
}

}  // namespace fgw::kern::detail

#endif  // __aarch64__ && __ARM_NEON
