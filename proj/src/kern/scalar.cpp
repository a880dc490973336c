// Scalar reference kernels.
//
// These define the numeric contract for every backend: reductions accumulate
// into four lanes striding by four, lanes combine as (l0?l2, l1?l3) then the
// two winners, and the tail folds in sequentially after the combine. The
// SIMD backends reproduce this order exactly, so results match bit for bit.

#include <cmath>
#include <limits>

#include "fgw/kern/math.hpp"
#include "table.hpp"

namespace fgw::kern::detail {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

inline double max2(double a, double b) noexcept { return a > b ? a : b; }
inline double min2(double a, double b) noexcept { return a < b ? a : b; }

double s_reduce_max(const double* x, std::size_t n) {
  double l0 = -kInf, l1 = -kInf, l2 = -kInf, l3 = -kInf;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    l0 = max2(l0, x[i]);
    l1 = max2(l1, x[i + 1]);
    l2 = max2(l2, x[i + 2]);
    l3 = max2(l3, x[i + 3]);
  }
  double r = max2(max2(l0, l2), max2(l1, l3));
  for (; i < n; ++i) r = max2(r, x[i]);
  return r;
}

void s_reduce_minmax(const double* x, std::size_t n, double* lo, double* hi) {
  double a0 = kInf, a1 = kInf, a2 = kInf, a3 = kInf;
  double b0 = -kInf, b1 = -kInf, b2 = -kInf, b3 = -kInf;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    a0 = min2(a0, x[i]);
    a1 = min2(a1, x[i + 1]);
    a2 = min2(a2, x[i + 2]);
    a3 = min2(a3, x[i + 3]);
    b0 = max2(b0, x[i]);
    b1 = max2(b1, x[i + 1]);
    b2 = max2(b2, x[i + 2]);
    b3 = max2(b3, x[i + 3]);
  }
  double mn = min2(min2(a0, a2), min2(a1, a3));
  double mx = max2(max2(b0, b2), max2(b1, b3));
  for (; i < n; ++i) {
    mn = min2(mn, x[i]);
    mx = max2(mx, x[i]);
  }
  *lo = mn;
  *hi = mx;
}

double s_sum(const double* x, std::size_t n) {
  double l0 = 0, l1 = 0, l2 = 0, l3 = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    l0 += x[i];
    l1 += x[i + 1];
    l2 += x[i + 2];
    l3 += x[i + 3];
  }
  double r = (l0 + l2) + (l1 + l3);
  for (; i < n; ++i) r += x[i];
  return r;
}

double s_dot(const double* a, const double* b, std::size_t n) {
  double l0 = 0, l1 = 0, l2 = 0, l3 = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    l0 = std::fma(a[i], b[i], l0);
    l1 = std::fma(a[i + 1], b[i + 1], l1);
    l2 = std::fma(a[i + 2], b[i + 2], l2);
    l3 = std::fma(a[i + 3], b[i + 3], l3);
  }
  double r = (l0 + l2) + (l1 + l3);
  for (; i < n; ++i) r = std::fma(a[i], b[i], r);
  return r;
}

double s_lse(const double* x, std::size_t n) {
  if (n == 0) return -kInf;
  const double m = s_reduce_max(x, n);
  if (std::isinf(m)) return m;
  double l0 = 0, l1 = 0, l2 = 0, l3 = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    l0 += exp_d(x[i] - m);
    l1 += exp_d(x[i + 1] - m);
    l2 += exp_d(x[i + 2] - m);
    l3 += exp_d(x[i + 3] - m);
  }
  double s = (l0 + l2) + (l1 + l3);
  for (; i < n; ++i) s += exp_d(x[i] - m);
  return m + log_d(s);
}

double s_lse_add(const double* x, const double* y, std::size_t n) {
  if (n == 0) return -kInf;
  double m0 = -kInf, m1 = -kInf, m2 = -kInf, m3 = -kInf;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    m0 = max2(m0, x[i] + y[i]);
    m1 = max2(m1, x[i + 1] + y[i + 1]);
    m2 = max2(m2, x[i + 2] + y[i + 2]);
    m3 = max2(m3, x[i + 3] + y[i + 3]);
  }
  double m = max2(max2(m0, m2), max2(m1, m3));
  for (; i < n; ++i) m = max2(m, x[i] + y[i]);
  if (std::isinf(m)) return m;
  double l0 = 0, l1 = 0, l2 = 0, l3 = 0;
  i = 0;
  for (; i + 4 <= n; i += 4) {
    l0 += exp_d((x[i] + y[i]) - m);
    l1 += exp_d((x[i + 1] + y[i + 1]) - m);
    l2 += exp_d((x[i + 2] + y[i + 2]) - m);
    l3 += exp_d((x[i + 3] + y[i + 3]) - m);
  }
  double s = (l0 + l2) + (l1 + l3);
  for (; i < n; ++i) s += exp_d((x[i] + y[i]) - m);
  return m + log_d(s);
}

void s_exp_add_scale(const double* x, const double* y, double c, double* out,
                     std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = exp_d((x[i] + y[i]) + c);
}

void s_abs_diff_add(double s, const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] += std::fabs(s - x[i]);
}

void s_axpby(double alpha, const double* x, double beta, const double* y,
             double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    out[i] = std::fma(alpha, x[i], beta * y[i]);
}

void s_sub_div(const double* x, double lo, double den, double* out,
               std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = (x[i] - lo) / den;
}

}  // namespace

const KernelTable& scalar_table() noexcept {
  static const KernelTable t = {
      s_reduce_max, s_reduce_minmax, s_sum,          s_dot,
      s_lse,        s_lse_add,       s_exp_add_scale, s_abs_diff_add,
      s_axpby,      s_sub_div,
  };
  return t;
}

}  // namespace fgw::kern::detail
