#include "fgw/gw.hpp"

#include <cmath>
#include <stdexcept>

#include "fgw/kern.hpp"

namespace fgw {

void FusionConfig::validate() const {
  if (!(alpha >= 0.0) || !(alpha <= 1.0))
    throw std::invalid_argument("fusion config: alpha in [0, 1]");
}

double gw_objective_exact(const TransportPlan& plan, const DistanceMatrix& dA,
                          const DistanceMatrix& dB) {
  const std::size_t n = plan.rows(), m = plan.cols();
  if (dA.size() != n || dB.size() != m)
    throw std::invalid_argument("gw_objective_exact: dimension mismatch");
  if (n * m > 4096)
    throw std::invalid_argument(
        "gw_objective_exact: N*M > 4096; oracle is quartic, use small instances");

  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const double pij = plan.m(i, j);
      for (std::size_t i2 = 0; i2 < n; ++i2)
        for (std::size_t j2 = 0; j2 < m; ++j2)
          acc += (std::fabs(dA.m(i, i2) - dB.m(j, j2)) * pij) * plan.m(i2, j2);
    }
  return acc;
}

CostMatrix linearized_geo_cost(const DistanceMatrix& dA,
                               const DistanceMatrix& dB,
                               const AnchorSet& anchors) {
  if (anchors.empty())
    throw std::invalid_argument("linearized_geo_cost: empty anchor set");
  const std::size_t n = dA.size(), m = dB.size();
  for (const AnchorPair& p : anchors.pairs)
    if (p.source < 0 || static_cast<std::size_t>(p.source) >= n ||
        p.target < 0 || static_cast<std::size_t>(p.target) >= m)
      throw std::invalid_argument("linearized_geo_cost: anchor out of range");

  Mat out(n, m, 0.0);
  for (const AnchorPair& p : anchors.pairs) {
    const double* db_row = dB.m.row(static_cast<std::size_t>(p.target));
    for (std::size_t i = 0; i < n; ++i)
      kern::abs_diff_add(dA.m(i, static_cast<std::size_t>(p.source)), db_row,
                         out.row(i), m);
  }
  Mat scaled(n, m);
  kern::sub_div(out.data(), 0.0, static_cast<double>(anchors.size()),
                scaled.data(), out.size());
  return CostMatrix{std::move(scaled), CostKind::geometric};
}

CostMatrix fuse_costs(const CostMatrix& sem, const CostMatrix& geo,
                      const FusionConfig& cfg) {
  cfg.validate();
  if (!sem.m.same_shape(geo.m))
    throw std::invalid_argument("fuse_costs: shape mismatch");
  double lo, hi;
  kern::reduce_minmax(sem.m.data(), sem.m.size(), &lo, &hi);
  if (hi > 1.0 + 1e-9)
    throw std::invalid_argument("fuse_costs: semantic cost not normalized");
  kern::reduce_minmax(geo.m.data(), geo.m.size(), &lo, &hi);
  if (hi > 1.0 + 1e-9)
    throw std::invalid_argument("fuse_costs: geometric cost not normalized");

  Mat out(sem.rows(), sem.cols());
  kern::axpby(1.0 - cfg.alpha, sem.m.data(), cfg.alpha, geo.m.data(),
              out.data(), out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {  // rounding can leak an ulp
    if (out.data()[i] < 0.0) out.data()[i] = 0.0;
    if (out.data()[i] > 1.0) out.data()[i] = 1.0;
  }
  return CostMatrix{std::move(out), CostKind::fused};
}

}  // namespace fgw
