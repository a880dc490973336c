#pragma once
// Deterministic synthetic-scenario generator with known ground truth, plus
// the evaluation metrics. Geometry is a bent 2D grid embedded in 3D;
// features are low-degree polynomials of the latent grid coordinate with
// seeded Gaussian noise, so every instance is reproducible bit for bit.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fgw/core.hpp"
#include "fgw/pipeline.hpp"

namespace fgw {

enum class ScenarioKind {
  rigid,            // target is a rigid transform of the source
  mirror_alias,     // bilaterally symmetric cloud, mirror twins share features
  partial_overlap,  // only a fraction of points have counterparts
  noisy,            // rigid plus per-point 3D jitter
  broken_structure, // one contiguous component displaced independently
};
const char* scenario_kind_name(ScenarioKind k);
ScenarioKind scenario_kind_from_name(const std::string& s);

struct Scenario {
  ScenarioKind kind = ScenarioKind::rigid;
  int n_points = 32;
  std::uint64_t seed = 0;
  int feature_dim = 8;
  double noise_sigma = 0.0;       // feature noise; also 3D jitter for `noisy`
  double overlap_fraction = 0.5;  // partial_overlap only
  double alias_fraction = 0.8;    // mirror_alias only

  void validate() const;
};

struct GroundTruth {
  std::vector<int> target_of_source;  // -1 for unmatched sources
  std::vector<int> unmatched_targets;

  std::size_t assigned_count() const;
  bool is_assigned(int i) const { return target_of_source[static_cast<std::size_t>(i)] >= 0; }
};

struct SynthInstance {
  PairProblem problem;
  GroundTruth gt;
};

// mirror_alias rounds n up to a mirror-closed grid (full rows of an even-
// width grid); every other scenario uses exactly n points.
SynthInstance generate(const Scenario& scn);

struct Metrics {
  int emitted = 0;   // matches or label pairs produced
  int assigned = 0;  // ground-truth pairs
  bool precision_defined = false;
  double precision = 0.0;  // emitted pairs landing within `radius` of truth
  double recall = 0.0;     // assigned sources with a within-radius emission
  double accuracy = 0.0;   // assigned sources whose (top) match is exact
};

Metrics evaluate(const std::vector<Match>& matches, const GroundTruth& gt,
                 double radius, const PointSet3D& ptsB);
Metrics evaluate(const PseudoLabels& labels, const GroundTruth& gt,
                 double radius, const PointSet3D& ptsB);

}  // namespace fgw
