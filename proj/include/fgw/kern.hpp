#pragma once
// Data-parallel inner loops behind the solvers and cost builders.
//
// Every kernel has a scalar reference implementation and, where the ISA is
// available, an AVX2 (x86-64) or NEON (aarch64) variant selected once at
// startup. All variants are bit-identical: reductions use a fixed 4-lane
// strided accumulation with a fixed lane-combine order, and transcendentals
// go through the shared exp_d/log_d from kern/math.hpp. The equivalence
// tests assert exact equality, not tolerance.
//
// Backend selection: auto-detected, overridable via the FGW_KERNEL
// environment variable (scalar|avx2|neon|auto) or set_backend().

#include <cstddef>

#include "fgw/kern/math.hpp"

namespace fgw::kern {

enum class Backend { scalar, avx2, neon };

Backend active_backend() noexcept;
bool backend_supported(Backend b) noexcept;
void set_backend(Backend b);  // throws std::invalid_argument if unsupported
const char* backend_name(Backend b) noexcept;

// max over x[0..n), -inf for n == 0
double reduce_max(const double* x, std::size_t n) noexcept;

// simultaneous min and max; lo = +inf, hi = -inf for n == 0
void reduce_minmax(const double* x, std::size_t n, double* lo,
                   double* hi) noexcept;

double sum(const double* x, std::size_t n) noexcept;

double dot(const double* a, const double* b, std::size_t n) noexcept;

// log(sum_i exp(x[i])), max-subtracted; -inf for n == 0 or all -inf
double lse(const double* x, std::size_t n) noexcept;

// log(sum_i exp(x[i] + y[i]))
double lse_add(const double* x, const double* y, std::size_t n) noexcept;

// out[i] = exp(x[i] + y[i] + c)
void exp_add_scale(const double* x, const double* y, double c, double* out,
                   std::size_t n) noexcept;

// out[i] += |s - x[i]|
void abs_diff_add(double s, const double* x, double* out,
                  std::size_t n) noexcept;

// out[i] = alpha * x[i] + beta * y[i]
void axpby(double alpha, const double* x, double beta, const double* y,
           double* out, std::size_t n) noexcept;

// out[i] = (x[i] - lo) / den; division keeps (hi - lo) / den == 1 exact
void sub_div(const double* x, double lo, double den, double* out,
             std::size_t n) noexcept;

}  // namespace fgw::kern
