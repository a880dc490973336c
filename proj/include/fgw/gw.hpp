#pragma once
// Exact Gromov-Wasserstein objective (small-instance oracle), anchor-based
// linearized geometric cost, and semantic/geometric fusion.

#include "fgw/anchors.hpp"
#include "fgw/core.hpp"

namespace fgw {

struct FusionConfig {
  double alpha = 0.3;  // 0 = semantic only, 1 = geometric only

  void validate() const;
};

// Quadruple sum  sum_{i,j,i',j'} |dA(i,i') - dB(j,j')| pi(i,j) pi(i',j').
// Ordered pairs, diagonal included (contributes zero). Accumulation order is
// i, j, i', j' ascending with acc += (|dA-dB| * pi(i,j)) * pi(i',j'), which
// independent oracles can reproduce bitwise. Guarded to N*M <= 4096.
double gw_objective_exact(const TransportPlan& plan, const DistanceMatrix& dA,
                          const DistanceMatrix& dB);

// C_geo(i,j) = (1/K) sum_anchors |dA(i, aA) - dB(j, aB)|; uniform anchor mass.
CostMatrix linearized_geo_cost(const DistanceMatrix& dA,
                               const DistanceMatrix& dB,
                               const AnchorSet& anchors);

// (1 - alpha) * sem + alpha * geo. Both inputs must already be min-max
// normalized; output clamped into [0, 1].
CostMatrix fuse_costs(const CostMatrix& sem, const CostMatrix& geo,
                      const FusionConfig& cfg);

}  // namespace fgw
