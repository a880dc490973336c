#pragma once
// Entropic balanced OT and log-domain unbalanced OT.
//
// Both production solvers iterate scaling updates on the log-kernel
// log K_ij = log a_i + log b_j - C_ij / epsilon, i.e. the entropic reference
// measure is a (x) b. The unbalanced textbook variant damps each potential
// update by rho / (rho + epsilon). The paper-pseudocode variant transcribes
// its reference pseudocode literally (kernel -C/rho, undamped updates); it
// is kept for bit-level comparison, not as the production default.

#include <string>
#include <vector>

#include "fgw/core.hpp"

namespace fgw {

enum class SolverVariant { balanced, uot_textbook, uot_paper_pseudocode };
const char* solver_variant_name(SolverVariant v);
SolverVariant solver_variant_from_name(const std::string& s);

struct SolverConfig {
  double rho = 0.75;     // KL marginal penalty
  double epsilon = 1.0;  // entropic regularizer
  int max_iters = 1000;
  double tol = 1e-9;     // sup-norm change of the log potentials
  SolverVariant variant = SolverVariant::uot_textbook;

  void validate() const;
};

struct SolveDiagnostics {
  int iterations_used = 0;
  double final_potential_change = 0.0;
  double row_marginal_err = 0.0;  // L1 distance of pi*1 to a
  double col_marginal_err = 0.0;
  double transported_mass = 0.0;
  bool converged = false;
  std::vector<double> row_potentials;  // final log scalings (phi, psi)
  std::vector<double> col_potentials;
};

struct SolveResult {
  TransportPlan plan;
  SolveDiagnostics diag;
};

// Balanced entropic Sinkhorn. Requires a, b to be probability vectors.
// Plan meta records <C, pi> as the objective.
SolveResult solve_balanced(const CostMatrix& c, const DiscreteMeasure& a,
                           const DiscreteMeasure& b, const SolverConfig& cfg);

// Unbalanced solver; cfg.variant selects uot_textbook or
// uot_paper_pseudocode. Plan meta records the marginal-relaxed objective.
SolveResult solve_unbalanced(const CostMatrix& c, const DiscreteMeasure& a,
                             const DiscreteMeasure& b, const SolverConfig& cfg);

struct UotObjective {
  double value = 0.0;
  bool feasible = true;  // false when mass lands on a zero-mass marginal
};

// <C, pi> + rho * KL(pi 1 || a) + rho * KL(pi^T 1 || b) with the generalized
// KL(p||q) = sum p log(p/q) - p + q, so mass-deficient plans stay finite.
UotObjective uot_objective(const TransportPlan& plan, const CostMatrix& c,
                           const DiscreteMeasure& a, const DiscreteMeasure& b,
                           double rho);

// Generalized KL divergence between nonnegative vectors (helper shared with
// tests and diagnostics). Infinite when p puts mass where q has none.
double generalized_kl(const double* p, const double* q, std::size_t n);

}  // namespace fgw
