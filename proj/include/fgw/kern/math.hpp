#pragma once
// Portable scalar exp/log used by every kernel backend and by the seeded RNG.
//
// libm's exp/log are correctly rounded on some platforms and off by an ulp on
// others, which breaks byte-level reproducibility of solver output and golden
// files. These routines use only IEEE-exact operations (+, -, *, /, fma, sqrt,
// integer bit manipulation), so they produce identical bits on every host and
// on every kernel backend. The AVX2/NEON backends implement the same algorithm
// step for step with the same constants.
//
// Accuracy: exp_d within ~2 ulp, log_d within 1 ulp (fdlibm algorithm).
// exp_d flushes to zero below -708 instead of producing denormals; Sinkhorn
// kernels treat such entries as empty anyway.

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

namespace fgw::kern {

inline constexpr double kExpOverflow = 709.782712893383973096;
inline constexpr double kExpUnderflow = -708.0;
inline constexpr double kLog2E = 1.44269504088896340736;
inline constexpr double kLn2Hi = 6.93147180369123816490e-01;
inline constexpr double kLn2Lo = 1.90821492927058770002e-10;

// Taylor coefficients 1/k!, k = 2..13, evaluated by Horner over |r| <= ln2/2.
inline constexpr double kExpC[12] = {
    1.0 / 2,          1.0 / 6,           1.0 / 24,          1.0 / 120,
    1.0 / 720,        1.0 / 5040,        1.0 / 40320,       1.0 / 362880,
    1.0 / 3628800,    1.0 / 39916800,    1.0 / 479001600,   1.0 / 6227020800.0,
};

inline double exp_d(double x) noexcept {
  if (std::isnan(x)) return x;
  if (x <= kExpUnderflow) return 0.0;
  if (x > kExpOverflow) return std::numeric_limits<double>::infinity();

  const double k = std::nearbyint(x * kLog2E);
  double r = std::fma(k, -kLn2Hi, x);
  r = std::fma(k, -kLn2Lo, r);

  double p = kExpC[11];
  for (int i = 10; i >= 0; --i) p = std::fma(p, r, kExpC[i]);
  p = std::fma(p, r, 1.0);
  p = std::fma(p, r, 1.0);

  // 2^k in two factors so |k| up to 1024 stays in normal range.
  const std::int64_t ki = static_cast<std::int64_t>(k);
  const std::int64_t kp = ki + 1075;
  const std::int64_t k1 = kp >> 1;
  const std::int64_t k2 = kp - k1;
  const double s1 = std::bit_cast<double>((k1 - 537 + 1023) << 52);
  const double s2 = std::bit_cast<double>((k2 - 538 + 1023) << 52);
  return (p * s1) * s2;
}

// fdlibm e_log.c, reduced: no errno, no exception flags.
inline double log_d(double x) noexcept {
  constexpr double Lg1 = 6.666666666666735130e-01;
  constexpr double Lg2 = 3.999999999940941908e-01;
  constexpr double Lg3 = 2.857142874366239149e-01;
  constexpr double Lg4 = 2.222219843214978396e-01;
  constexpr double Lg5 = 1.818357216161805012e-01;
  constexpr double Lg6 = 1.531383769920937332e-01;
  constexpr double Lg7 = 1.479819860511658591e-01;

  if (std::isnan(x)) return x;
  if (x == 0.0) return -std::numeric_limits<double>::infinity();
  if (x < 0.0) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(x)) return x;

  std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
  int k = 0;
  if (bits < (std::uint64_t{1} << 52)) {  // subnormal input
    x *= 1.8014398509481984e16;           // 2^54
    k -= 54;
    bits = std::bit_cast<std::uint64_t>(x);
  }
  std::int64_t hx = static_cast<std::int64_t>(bits >> 32);
  k += static_cast<int>((hx >> 20) - 1023);
  hx &= 0x000fffff;
  const std::int64_t i = (hx + 0x95f64) & 0x100000;
  // mantissa normalized to [sqrt(2)/2, sqrt(2))
  bits = (static_cast<std::uint64_t>(hx | (i ^ 0x3ff00000)) << 32) |
         (bits & 0xffffffffULL);
  x = std::bit_cast<double>(bits);
  k += static_cast<int>(i >> 20);

  const double f = x - 1.0;
  const double dk = static_cast<double>(k);
  if (f == 0.0) return dk * kLn2Hi + dk * kLn2Lo;
  const double s = f / (2.0 + f);
  const double z = s * s;
  const double w = z * z;
  const double t1 = w * (Lg2 + w * (Lg4 + w * Lg6));
  const double t2 = z * (Lg1 + w * (Lg3 + w * (Lg5 + w * Lg7)));
  const double R = t2 + t1;
  const double hfsq = 0.5 * f * f;
  return dk * kLn2Hi - ((hfsq - (s * (hfsq + R) + dk * kLn2Lo)) - f);
}

}  // namespace fgw::kern
