#pragma once
// Selection of cycle-consistent, high-confidence anchor pairs from a
// transport plan. Anchors seed the linearized geometric cost.

#include <stdexcept>
#include <vector>

#include "fgw/core.hpp"

namespace fgw {

struct AnchorPair {
  int source = 0;
  int target = 0;
  double confidence = 0.0;   // plan value at (source, target)
  double cycle_error = 0.0;  // 3D round-trip displacement on the source side
};

struct AnchorSet {
  std::vector<AnchorPair> pairs;
  double threshold = 0.0;  // the delta used to filter candidates
  bool shortfall = false;  // fewer pairs than requested survived

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
};

enum class AnchorRanking {
  confidence,  // plan value only (default)
  combined,    // confidence / (1 + cycle_error); favors low distortion too
};

struct AnchorConfig {
  int k = 64;
  double quantile = 0.01;  // threshold quantile over observed cycle errors
  AnchorRanking ranking = AnchorRanking::confidence;

  void validate() const;
};

// Raised when no candidate survives the cycle-consistency filter.
struct NoAnchorsError : std::runtime_error {
  NoAnchorsError() : std::runtime_error("no consistent anchors") {}
};

// Forward/backward argmax matching with deterministic lowest-index ties,
// 3D cycle error on the source side, quantile threshold with a 1e-9 floor,
// then greedy confidence ranking with one-to-one target use.
AnchorSet select_anchors(const TransportPlan& plan, const PointSet3D& ptsA,
                         const PointSet3D& ptsB, const AnchorConfig& cfg);

}  // namespace fgw
