#include "fgw/losses.hpp"

#include <cmath>
#include <stdexcept>

#include "fgw/kern.hpp"
#include "fgw/rng.hpp"

namespace fgw {
namespace {

// softmax of tau * v into w; returns the LSE for reuse
double softmax_scaled(const double* v, double tau, double* w, std::size_t n,
                      std::vector<double>& scratch) {
  scratch.resize(n);
  for (std::size_t j = 0; j < n; ++j) scratch[j] = tau * v[j];
  const double l = kern::lse(scratch.data(), n);
  for (std::size_t j = 0; j < n; ++j) w[j] = kern::exp_d(scratch[j] - l);
  return l;
}

}  // namespace

void SimilarityMatrix::validate() const {
  if (s.empty()) throw std::invalid_argument("similarity matrix is empty");
  if (!s.all_finite())
    throw std::invalid_argument("similarity matrix has non-finite entries");
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
}

void SoftTargetConfig::validate() const {
  if (!(beta >= 0.0) || !(beta <= 1.0))
    throw std::invalid_argument("soft target config: beta in [0, 1]");
}

TransportPlan current_plan(const SimilarityMatrix& sim,
                           const SolverConfig& cfg) {
  sim.validate();
  Mat cost(sim.s.rows(), sim.s.cols());
  for (std::size_t i = 0; i < cost.size(); ++i) {
    double v = 1.0 - sim.s.data()[i];
    if (v < 0.0) v = 0.0;
    if (v > 2.0) v = 2.0;
    cost.data()[i] = v;
  }
  SolveResult res = solve_balanced(
      CostMatrix{std::move(cost), CostKind::semantic},
      DiscreteMeasure::uniform(sim.s.rows()),
      DiscreteMeasure::uniform(sim.s.cols()), cfg);
  res.plan.meta.solver = "current_plan";
  res.plan.meta.gradient_detached = true;
  return std::move(res.plan);
}

Mat soft_target(const PseudoLabels& hard, const TransportPlan& curr,
                const SoftTargetConfig& cfg) {
  cfg.validate();
  if (!hard.hard.same_shape(curr.m))
    throw std::invalid_argument("soft_target: shape mismatch");
  Mat out(hard.rows(), hard.cols());
  kern::axpby(1.0 - cfg.beta, hard.hard.data(), cfg.beta, curr.m.data(),
              out.data(), out.size());
  return out;
}

LossReport soft_ce_loss(const SimilarityMatrix& sim, const Mat& target) {
  sim.validate();
  if (!sim.s.same_shape(target))
    throw std::invalid_argument("soft_ce_loss: shape mismatch");
  for (std::size_t i = 0; i < target.size(); ++i)
    if (target.data()[i] < 0.0)
      throw std::invalid_argument("soft_ce_loss: target must be nonnegative");

  const std::size_t n = sim.s.rows(), m = sim.s.cols();
  const double tau = sim.tau;
  LossReport rep;
  rep.grad_s = Mat(n, m, 0.0);

  // log p comes from the logits (tau*S - LSE), which stay finite even when
  // the softmax weight itself underflows to zero
  std::vector<double> w(std::max(n, m)), scratch;
  double ce_rows = 0.0, gtau_rows = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = kern::sum(target.row(i), m);
    if (!(z > 0.0)) continue;
    const double l = softmax_scaled(sim.s.row(i), tau, w.data(), m, scratch);
    double ce = 0.0, tdot = 0.0, pdot = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double tbar = target(i, j) / z;
      ce -= tbar * (scratch[j] - l);
      tdot += tbar * sim.s(i, j);
      pdot += w[j] * sim.s(i, j);
      rep.grad_s(i, j) += 0.5 * tau * (w[j] - tbar);
    }
    ce_rows += ce;
    gtau_rows += pdot - tdot;
  }

  const Mat st = sim.s.transposed();
  const Mat tt = target.transposed();
  double ce_cols = 0.0, gtau_cols = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double z = kern::sum(tt.row(j), n);
    if (!(z > 0.0)) continue;
    const double l = softmax_scaled(st.row(j), tau, w.data(), n, scratch);
    double ce = 0.0, tdot = 0.0, pdot = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double tbar = tt(j, i) / z;
      ce -= tbar * (scratch[i] - l);
      tdot += tbar * st(j, i);
      pdot += w[i] * st(j, i);
      rep.grad_s(i, j) += 0.5 * tau * (w[i] - tbar);
    }
    ce_cols += ce;
    gtau_cols += pdot - tdot;
  }

  rep.value = 0.5 * (ce_rows + ce_cols);
  rep.grad_tau = 0.5 * (gtau_rows + gtau_cols);
  return rep;
}

double soft_ce_source_term(const SimilarityMatrix& sim, const Mat& target) {
  sim.validate();
  if (!sim.s.same_shape(target))
    throw std::invalid_argument("soft_ce_source_term: shape mismatch");
  const std::size_t n = sim.s.rows(), m = sim.s.cols();
  std::vector<double> w(m), scratch;
  double ce = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = kern::sum(target.row(i), m);
    if (!(z > 0.0)) continue;
    const double l = softmax_scaled(sim.s.row(i), sim.tau, w.data(), m, scratch);
    for (std::size_t j = 0; j < m; ++j)
      ce -= (target(i, j) / z) * (scratch[j] - l);
  }
  return ce;
}

LossReport dense_loss(const SimilarityMatrix& sim,
                      const std::vector<DensePair>& pairs,
                      const std::vector<std::array<double, 2>>& grid,
                      double noise_sigma, std::uint64_t seed) {
  sim.validate();
  if (grid.size() != sim.s.cols())
    throw std::invalid_argument("dense_loss: grid length must equal S columns");
  if (!(noise_sigma >= 0.0))
    throw std::invalid_argument("dense_loss: noise_sigma >= 0");
  for (const DensePair& p : pairs)
    if (p.source < 0 || static_cast<std::size_t>(p.source) >= sim.s.rows() ||
        p.target_cell < 0 ||
        static_cast<std::size_t>(p.target_cell) >= grid.size())
      throw std::invalid_argument("dense_loss: pair index out of range");

  const std::size_t m = sim.s.cols();
  const double tau = sim.tau;
  LossReport rep;
  rep.grad_s = Mat(sim.s.rows(), m, 0.0);
  if (pairs.empty()) return rep;

  Rng rng(seed);
  std::vector<double> w(m), scratch;
  for (const DensePair& p : pairs) {
    const std::size_t i = static_cast<std::size_t>(p.source);
    const double* srow = sim.s.row(i);
    softmax_scaled(srow, tau, w.data(), m, scratch);

    double px = 0.0, py = 0.0;  // soft-argmax position
    for (std::size_t j = 0; j < m; ++j) {
      px += w[j] * grid[j][0];
      py += w[j] * grid[j][1];
    }
    double tx = grid[static_cast<std::size_t>(p.target_cell)][0];
    double ty = grid[static_cast<std::size_t>(p.target_cell)][1];
    if (noise_sigma > 0.0) {
      tx += noise_sigma * rng.gaussian();
      ty += noise_sigma * rng.gaussian();
    }
    const double rx = px - tx, ry = py - ty;
    const double len = std::sqrt(rx * rx + ry * ry);
    rep.value += len;
    if (len == 0.0) continue;  // subgradient 0 at the kink

    const double ux = rx / len, uy = ry / len;
    const double rdotp = ux * px + uy * py;
    double sbar = 0.0;
    for (std::size_t j = 0; j < m; ++j) sbar += w[j] * srow[j];
    for (std::size_t j = 0; j < m; ++j) {
      const double gproj = ux * grid[j][0] + uy * grid[j][1];
      rep.grad_s(i, j) += tau * w[j] * (gproj - rdotp);
      rep.grad_tau += gproj * w[j] * (srow[j] - sbar);
    }
  }
  return rep;
}

}  // namespace fgw
