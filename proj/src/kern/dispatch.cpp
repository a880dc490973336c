#include "fgw/kern.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

#include "table.hpp"

namespace fgw::kern {
namespace {

using detail::KernelTable;

bool cpu_has_avx2() noexcept {
#if defined(FGW_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* table_for(Backend b) noexcept {
  switch (b) {
    case Backend::scalar:
      return &detail::scalar_table();
    case Backend::avx2:
#if defined(FGW_HAVE_AVX2_TU)
      if (cpu_has_avx2()) return &detail::avx2_table();
#endif
      return nullptr;
    case Backend::neon:
#if defined(FGW_HAVE_NEON_TU)
      return &detail::neon_table();
#else
      return nullptr;
#endif
  }
  return nullptr;
}

struct ActiveState {
  std::atomic<const KernelTable*> table;
  std::atomic<Backend> backend;
};

Backend detect_backend() noexcept {
  Backend pick = Backend::scalar;
#if defined(FGW_HAVE_NEON_TU)
  if (table_for(Backend::neon)) pick = Backend::neon;
#endif
  if (table_for(Backend::avx2)) pick = Backend::avx2;
  if (const char* env = std::getenv("FGW_KERNEL")) {
    if (!std::strcmp(env, "scalar")) pick = Backend::scalar;
    else if (!std::strcmp(env, "avx2") && table_for(Backend::avx2))
      pick = Backend::avx2;
    else if (!std::strcmp(env, "neon") && table_for(Backend::neon))
      pick = Backend::neon;
    // "auto" or unrecognized values keep the detected default
  }
  return pick;
}

ActiveState& state() noexcept {
  static const Backend initial = detect_backend();
  static ActiveState s{table_for(initial), initial};
  return s;
}

inline const KernelTable& tab() noexcept { return *state().table.load(); }

}  // namespace

Backend active_backend() noexcept { return state().backend.load(); }

bool backend_supported(Backend b) noexcept { return table_for(b) != nullptr; }

void set_backend(Backend b) {
  const KernelTable* t = table_for(b);
  if (!t)
    throw std::invalid_argument(std::string("kernel backend unavailable: ") +
                                backend_name(b));
  state().backend.store(b);
  state().table.store(t);
}

const char* backend_name(Backend b) noexcept {
  switch (b) {
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
    case Backend::neon: return "neon";
  }
  return "?";
}

double reduce_max(const double* x, std::size_t n) noexcept {
  return tab().reduce_max(x, n);
}
void reduce_minmax(const double* x, std::size_t n, double* lo,
                   double* hi) noexcept {
  tab().reduce_minmax(x, n, lo, hi);
}
double sum(const double* x, std::size_t n) noexcept { return tab().sum(x, n); }
double dot(const double* a, const double* b, std::size_t n) noexcept {
  return tab().dot(a, b, n);
}
double lse(const double* x, std::size_t n) noexcept { return tab().lse(x, n); }
double lse_add(const double* x, const double* y, std::size_t n) noexcept {
  return tab().lse_add(x, y, n);
}
void exp_add_scale(const double* x, const double* y, double c, double* out,
                   std::size_t n) noexcept {
  tab().exp_add_scale(x, y, c, out, n);
}
void abs_diff_add(double s, const double* x, double* out,
                  std::size_t n) noexcept {
  tab().abs_diff_add(s, x, out, n);
}
void axpby(double alpha, const double* x, double beta, const double* y,
           double* out, std::size_t n) noexcept {
  tab().axpby(alpha, x, beta, y, out, n);
}
void sub_div(const double* x, double lo, double den, double* out,
             std::size_t n) noexcept {
  tab().sub_div(x, lo, den, out, n);
}

}  // namespace fgw::kern
