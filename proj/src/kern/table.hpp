#pragma once
// Internal dispatch table shared by the backend translation units.

#include <cstddef>

namespace fgw::kern::detail {

struct KernelTable {
  double (*reduce_max)(const double*, std::size_t);
  void (*reduce_minmax)(const double*, std::size_t, double*, double*);
  double (*sum)(const double*, std::size_t);
  double (*dot)(const double*, const double*, std::size_t);
  double (*lse)(const double*, std::size_t);
  double (*lse_add)(const double*, const double*, std::size_t);
  void (*exp_add_scale)(const double*, const double*, double, double*,
                        std::size_t);
  void (*abs_diff_add)(double, const double*, double*, std::size_t);
  void (*axpby)(double, const double*, double, const double*, double*,
                std::size_t);
  void (*sub_div)(const double*, double, double, double*, std::size_t);
};

const KernelTable& scalar_table() noexcept;
#if defined(FGW_HAVE_AVX2_TU)
const KernelTable& avx2_table() noexcept;
#endif
#if defined(FGW_HAVE_NEON_TU)
const KernelTable& neon_table() noexcept;
#endif

}  // namespace fgw::kern::detail
