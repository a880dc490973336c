#pragma once
// Seeded counter-style generator (splitmix64) with Gaussian draws via the
// Marsaglia polar method. Uses kern::log_d instead of libm, so the stream of
// doubles is identical on every platform and golden files stay byte-stable.

#include <cmath>
#include <cstdint>

#include "fgw/kern/math.hpp"

namespace fgw {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1), 53-bit resolution
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // index in [0, n)
  std::uint64_t index(std::uint64_t n) { return next_u64() % n; }

  // standard normal; polar rejection, second deviate cached
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double v1, v2, s;
    do {
      v1 = 2.0 * uniform() - 1.0;
      v2 = 2.0 * uniform() - 1.0;
      s = v1 * v1 + v2 * v2;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * kern::log_d(s) / s);
    spare_ = v2 * f;
    has_spare_ = true;
    return v1 * f;
  }

  template <typename T>
  void shuffle(T* v, std::size_t n) {  // Fisher-Yates
    for (std::size_t i = n; i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(index(i));
      T tmp = v[i - 1];
      v[i - 1] = v[j];
      v[j] = tmp;
    }
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fgw
