#include "fgw/pipeline.hpp"

#include <algorithm>
#include <stdexcept>

#include "fgw/kern.hpp"

namespace fgw {
namespace {

SolveResult run_solver(const CostMatrix& c, const PairProblem& prob,
                       const SolverConfig& cfg) {
  if (cfg.variant == SolverVariant::balanced)
    return solve_balanced(c, prob.massA, prob.massB, cfg);
  return solve_unbalanced(c, prob.massA, prob.massB, cfg);
}

StageDiagnostics make_stage_diag(int stage, const SolveResult& res,
                                 const AnchorSet* anchors, bool fallback) {
  StageDiagnostics d;
  d.stage = stage;
  d.solve = res.diag;
  d.objective = res.plan.meta.objective;
  d.anchor_fallback = fallback;
  if (anchors && !anchors->empty()) {
    d.anchor_count = static_cast<int>(anchors->size());
    double mean = 0.0;
    for (const AnchorPair& p : anchors->pairs) mean += p.cycle_error;
    d.anchor_mean_cycle_error = mean / static_cast<double>(anchors->size());
    d.anchor_shortfall = anchors->shortfall;
  }
  return d;
}

// top-k column indices of a row by descending value, ties toward lower index
std::vector<int> topk_indices(const double* v, std::size_t n, int k) {
  std::vector<int> idx(n);
  for (std::size_t j = 0; j < n; ++j) idx[j] = static_cast<int>(j);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (v[a] != v[b]) return v[a] > v[b];
    return a < b;
  });
  if (idx.size() > static_cast<std::size_t>(k))
    idx.resize(static_cast<std::size_t>(k));
  return idx;
}

}  // namespace

void PipelineConfig::validate() const {
  if (iters_T < 1) throw std::invalid_argument("pipeline: iters_T >= 1");
  if (topk < 1) throw std::invalid_argument("pipeline: topk >= 1");
  fusion.validate();
  anchor.validate();
  solver.validate();
}

bool PipelineResult::any_warning() const {
  for (const StageDiagnostics& d : stages)
    if (d.anchor_fallback || d.anchor_shortfall || !d.solve.converged)
      return true;
  return false;
}

PipelineResult run_pipeline(const PairProblem& prob,
                            const PipelineConfig& cfg) {
  prob.validate();
  cfg.validate();

  PipelineResult out;
  const CostMatrix c_sem =
      minmax_normalize(semantic_cost(prob.featA, prob.featB));

  SolveResult res = run_solver(c_sem, prob, cfg.solver);
  res.plan.meta.iteration = 0;
  out.stages.push_back(make_stage_diag(0, res, nullptr, false));
  out.stage_plans.push_back(res.plan);

  const DistanceMatrix dA = pairwise_distances(prob.ptsA);
  const DistanceMatrix dB = pairwise_distances(prob.ptsB);

  for (int t = 1; t <= cfg.iters_T; ++t) {
    AnchorSet anchors;
    bool fallback = false;
    try {
      anchors = select_anchors(out.stage_plans.back(), prob.ptsA, prob.ptsB,
                               cfg.anchor);
    } catch (const NoAnchorsError&) {
      fallback = true;
    }

    if (fallback) {
      res = run_solver(c_sem, prob, cfg.solver);
    } else {
      const CostMatrix c_geo =
          minmax_normalize(linearized_geo_cost(dA, dB, anchors));
      const CostMatrix c_total = fuse_costs(c_sem, c_geo, cfg.fusion);
      res = run_solver(c_total, prob, cfg.solver);
    }
    res.plan.meta.iteration = t;
    out.stages.push_back(make_stage_diag(t, res, &anchors, fallback));
    out.anchor_sets.push_back(std::move(anchors));
    out.stage_plans.push_back(res.plan);
  }

  out.final_plan = out.stage_plans.back();
  return out;
}

PseudoLabels extract_pseudo_labels(const TransportPlan& plan,
                                   const PipelineConfig& cfg) {
  cfg.validate();
  const std::size_t n = plan.rows(), m = plan.cols();
  const int k = cfg.topk;

  std::vector<std::vector<int>> fwd(n);
  for (std::size_t i = 0; i < n; ++i) fwd[i] = topk_indices(plan.m.row(i), m, k);

  // backward membership: in_bwd[j * n + i] = 1 iff i is in column j's top-k
  std::vector<std::uint8_t> in_bwd(n * m, 0);
  if (cfg.relaxed_cc) {
    const Mat t = plan.m.transposed();
    for (std::size_t j = 0; j < m; ++j)
      for (int i : topk_indices(t.row(j), n, k))
        in_bwd[j * n + static_cast<std::size_t>(i)] = 1;
  }

  PseudoLabels out;
  out.hard = Mat(n, m, 0.0);
  out.candidates.resize(n);
  out.kept_mask.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (int j : fwd[i]) {
      if (cfg.relaxed_cc && !in_bwd[static_cast<std::size_t>(j) * n + i])
        continue;
      out.candidates[i].push_back(
          PseudoLabels::Candidate{j, plan.m(i, static_cast<std::size_t>(j))});
      out.hard(i, static_cast<std::size_t>(j)) = 1.0;
    }
    out.kept_mask[i] = out.candidates[i].empty() ? 0 : 1;
  }
  return out;
}

std::vector<Match> infer_matches(const FeatureMatrix& featA,
                                 const FeatureMatrix& featB) {
  if (featA.dim() != featB.dim())
    throw std::invalid_argument("infer_matches: feature dimension mismatch");
  const FeatureMatrix na = featA.row_normalized();
  const FeatureMatrix nb = featB.row_normalized();
  std::vector<Match> out;
  out.reserve(featA.rows());
  for (std::size_t i = 0; i < featA.rows(); ++i) {
    int best = 0;
    double bv = kern::dot(na.data().row(i), nb.data().row(0), featA.dim());
    for (std::size_t j = 1; j < featB.rows(); ++j) {
      const double s = kern::dot(na.data().row(i), nb.data().row(j), featA.dim());
      if (s > bv) {
        bv = s;
        best = static_cast<int>(j);
      }
    }
    out.push_back(Match{static_cast<int>(i), best, bv});
  }
  return out;
}

std::vector<Match> top_matches(const PseudoLabels& labels) {
  std::vector<Match> out;
  for (std::size_t i = 0; i < labels.rows(); ++i) {
    if (!labels.kept_mask[i]) continue;
    const auto& c = labels.candidates[i].front();  // already value-ordered
    out.push_back(Match{static_cast<int>(i), c.target, c.value});
  }
  return out;
}

}  // namespace fgw
