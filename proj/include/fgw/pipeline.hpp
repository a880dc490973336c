#pragma once
// End-to-end pseudo-label generator: semantic UOT initialization, T rounds
// of anchor-based FGW refinement, pseudo-label extraction with relaxed
// (mutual top-k) cycle consistency, and plain cosine nearest-neighbor
// inference.

#include <cstdint>
#include <vector>

#include "fgw/anchors.hpp"
#include "fgw/core.hpp"
#include "fgw/gw.hpp"
#include "fgw/sinkhorn.hpp"

namespace fgw {

struct PipelineConfig {
  int iters_T = 5;  // refinement steps
  FusionConfig fusion;
  AnchorConfig anchor;
  SolverConfig solver;
  int topk = 3;
  bool relaxed_cc = true;  // mutual top-k filter in extract_pseudo_labels

  void validate() const;
};

struct StageDiagnostics {
  int stage = 0;  // 0 = semantic init, 1..T = refinements
  SolveDiagnostics solve;
  double objective = 0.0;
  int anchor_count = 0;
  double anchor_mean_cycle_error = 0.0;
  bool anchor_fallback = false;   // anchors failed; semantic-only stage
  bool anchor_shortfall = false;  // fewer anchors than requested
};

struct PipelineResult {
  TransportPlan final_plan;
  std::vector<TransportPlan> stage_plans;  // pi^(0) .. pi^(T)
  std::vector<AnchorSet> anchor_sets;      // one per refinement stage
  std::vector<StageDiagnostics> stages;    // one per stage including stage 0

  bool any_warning() const;
};

// The semantic cost is min-max normalized once up front (it never changes);
// the geometric cost is normalized per stage. Every stage solve cold-starts
// its potentials so runs are reproducible. On anchor failure a stage falls
// back to the semantic-only cost instead of aborting.
PipelineResult run_pipeline(const PairProblem& prob, const PipelineConfig& cfg);

struct PseudoLabels {
  Mat hard;  // n x m binary multi-hot
  struct Candidate {
    int target = 0;
    double value = 0.0;  // plan value
  };
  // per source, the candidates that survived the mutual top-k filter,
  // ordered by descending plan value (ties toward lower target index)
  std::vector<std::vector<Candidate>> candidates;
  std::vector<std::uint8_t> kept_mask;  // row survived; == !candidates[i].empty()

  std::size_t rows() const { return hard.rows(); }
  std::size_t cols() const { return hard.cols(); }
};

// Top-k plan entries per source; a candidate (i, j) is kept iff j is in i's
// forward top-k and i is in j's backward top-k. With relaxed_cc = false the
// backward check is skipped and all top-k candidates are kept.
PseudoLabels extract_pseudo_labels(const TransportPlan& plan,
                                   const PipelineConfig& cfg);

struct Match {
  int source = 0;
  int target = 0;
  double similarity = 0.0;
};

// Cosine nearest neighbor per source row, ties toward the lowest index.
std::vector<Match> infer_matches(const FeatureMatrix& featA,
                                 const FeatureMatrix& featB);

// Highest-value kept candidate per surviving source (helper for evaluation).
std::vector<Match> top_matches(const PseudoLabels& labels);

}  // namespace fgw
