#pragma once
// The two training losses as pure, analytically differentiable functions of
// a similarity matrix, plus the gradient-detached "current plan" and the
// soft-target blend. Gradients are validated against finite differences in
// the test suite.

#include <array>
#include <cstdint>
#include <vector>

#include "fgw/core.hpp"
#include "fgw/pipeline.hpp"
#include "fgw/sinkhorn.hpp"

namespace fgw {

struct SimilarityMatrix {
  Mat s;             // cosine similarities
  double tau = 1.0;  // temperature, explicit scalar with reported gradient

  void validate() const;
};

struct SoftTargetConfig {
  double beta = 0.5;  // blend weight: (1 - beta) hard + beta current

  void validate() const;
};

struct LossReport {
  double value = 0.0;
  Mat grad_s;           // d loss / d S
  double grad_tau = 0.0;
};

// Balanced entropic plan on cost 1 - S with uniform marginals, flagged
// gradient-detached: every loss treats it as a constant.
TransportPlan current_plan(const SimilarityMatrix& sim,
                           const SolverConfig& cfg);

// (1 - beta) * hard + beta * curr, entrywise; exact at both endpoints.
Mat soft_target(const PseudoLabels& hard, const TransportPlan& curr,
                const SoftTargetConfig& cfg);

// Symmetric soft cross entropy:
//   L = 1/2 [ CE(tau S, T) + CE(tau S^T, T^T) ],
//   CE(tau S, T) = -sum_i (1/Z_i) sum_j T_ij log softmax_j(tau S_i.)
// Rows (or columns) with Z = 0 contribute nothing.
LossReport soft_ce_loss(const SimilarityMatrix& sim, const Mat& target);

// The source->target term CE(tau S, T) alone. Shift-invariant per row of S
// (the symmetric loss is not).
double soft_ce_source_term(const SimilarityMatrix& sim, const Mat& target);

struct DensePair {
  int source = 0;       // row of S
  int target_cell = 0;  // index into the coordinate grid
};

// Soft-argmax regression: predicted position is the softmax(tau S_i.)-
// weighted grid centroid; loss is the 2-norm to the (optionally noised)
// target position summed over pairs. Noise is drawn per pair (x then y)
// from the seeded generator; sigma = 0 draws nothing.
LossReport dense_loss(const SimilarityMatrix& sim,
                      const std::vector<DensePair>& pairs,
                      const std::vector<std::array<double, 2>>& grid,
                      double noise_sigma, std::uint64_t seed);

}  // namespace fgw
