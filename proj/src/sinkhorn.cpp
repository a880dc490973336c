#include "fgw/sinkhorn.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "fgw/kern.hpp"

namespace fgw {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_inputs(const CostMatrix& c, const DiscreteMeasure& a,
                  const DiscreteMeasure& b) {
  a.validate();
  b.validate();
  if (!(a.total() > 0.0) || !(b.total() > 0.0))
    throw std::invalid_argument("solver: marginals must carry positive mass");
  if (c.rows() != a.size() || c.cols() != b.size())
    throw std::invalid_argument("solver: cost/marginal dimension mismatch");
  if (!c.m.all_finite())
    throw std::invalid_argument("solver: cost matrix has non-finite entries");
}

std::vector<double> log_vec(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = kern::log_d(v[i]);
  return out;
}

double sup_change(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::fabs(a[i] - b[i]);
    if (d > m) m = d;
  }
  return m;
}

struct ScalingState {
  Mat logK;   // n x m
  Mat logKT;  // m x n
  std::vector<double> la, lb;  // log masses
  std::vector<double> phi, psi;
};

// Shared scaling loop: phi_i <- damp * (la_i - LSE_j(logK_ij + psi_j)),
// psi likewise on the transpose. damp = 1 for balanced Sinkhorn.
SolveDiagnostics iterate(ScalingState& st, double damp, int max_iters,
                         double tol) {
  const std::size_t n = st.la.size(), m = st.lb.size();
  std::vector<double> phi_new(n), psi_new(m);
  SolveDiagnostics diag;
  double change = kInf;
  int it = 0;
  for (; it < max_iters; ++it) {
    for (std::size_t i = 0; i < n; ++i)
      phi_new[i] = st.la[i] == -kInf
                       ? -kInf
                       : damp * (st.la[i] -
                                 kern::lse_add(st.logK.row(i), st.psi.data(), m));
    for (std::size_t j = 0; j < m; ++j)
      psi_new[j] = st.lb[j] == -kInf
                       ? -kInf
                       : damp * (st.lb[j] - kern::lse_add(st.logKT.row(j),
                                                          phi_new.data(), n));
    change = std::max(sup_change(phi_new, st.phi), sup_change(psi_new, st.psi));
    st.phi.swap(phi_new);
    st.psi.swap(psi_new);
    if (change < tol) {
      ++it;
      break;
    }
  }
  diag.iterations_used = it;
  diag.final_potential_change = change;
  diag.converged = change < tol;
  diag.row_potentials = st.phi;
  diag.col_potentials = st.psi;
  return diag;
}

TransportPlan assemble_plan(const ScalingState& st, const char* solver) {
  const std::size_t n = st.la.size(), m = st.lb.size();
  TransportPlan plan;
  plan.m = Mat(n, m);
  for (std::size_t i = 0; i < n; ++i)
    kern::exp_add_scale(st.logK.row(i), st.psi.data(), st.phi[i],
                        plan.m.row(i), m);
  plan.meta.solver = solver;
  return plan;
}

void fill_marginal_diag(const TransportPlan& plan, const DiscreteMeasure& a,
                        const DiscreteMeasure& b, SolveDiagnostics& diag) {
  const std::size_t n = plan.rows(), m = plan.cols();
  double row_err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = kern::sum(plan.m.row(i), m);
    row_err += std::fabs(r - a.mass[i]);
  }
  double col_err = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += plan.m(i, j);
    col_err += std::fabs(s - b.mass[j]);
  }
  diag.row_marginal_err = row_err;
  diag.col_marginal_err = col_err;
  diag.transported_mass = kern::sum(plan.m.data(), plan.m.size());
}

ScalingState make_state(const CostMatrix& c, const DiscreteMeasure& a,
                        const DiscreteMeasure& b, double eps) {
  ScalingState st;
  const std::size_t n = a.size(), m = b.size();
  st.la = log_vec(a.mass);
  st.lb = log_vec(b.mass);
  st.logK = Mat(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      st.logK(i, j) = st.la[i] + st.lb[j] - c.m(i, j) / eps;
  st.logKT = st.logK.transposed();
  st.phi.assign(n, 0.0);
  st.psi.assign(m, 0.0);
  return st;
}

}  // namespace

const char* solver_variant_name(SolverVariant v) {
  switch (v) {
    case SolverVariant::balanced: return "balanced";
    case SolverVariant::uot_textbook: return "uot_textbook";
    case SolverVariant::uot_paper_pseudocode: return "uot_paper_pseudocode";
  }
  return "?";
}

SolverVariant solver_variant_from_name(const std::string& s) {
  if (s == "balanced") return SolverVariant::balanced;
  if (s == "uot_textbook" || s == "textbook") return SolverVariant::uot_textbook;
  if (s == "uot_paper_pseudocode" || s == "paper-pseudocode")
    return SolverVariant::uot_paper_pseudocode;
  throw std::invalid_argument("unknown solver variant: " + s);
}

void SolverConfig::validate() const {
  if (!(rho > 0.0) || !(epsilon > 0.0) || !(tol > 0.0) || max_iters < 1)
    throw std::invalid_argument("solver config: rho, epsilon, tol > 0 and max_iters >= 1");
}

SolveResult solve_balanced(const CostMatrix& c, const DiscreteMeasure& a,
                           const DiscreteMeasure& b, const SolverConfig& cfg) {
  cfg.validate();
  check_inputs(c, a, b);
  if (!a.is_probability() || !b.is_probability())
    throw std::invalid_argument("solve_balanced: marginals must sum to 1");

  ScalingState st = make_state(c, a, b, cfg.epsilon);
  SolveDiagnostics diag = iterate(st, 1.0, cfg.max_iters, cfg.tol);
  TransportPlan plan = assemble_plan(st, "balanced");
  fill_marginal_diag(plan, a, b, diag);
  plan.meta.objective = kern::dot(c.m.data(), plan.m.data(), plan.m.size());
  return SolveResult{std::move(plan), diag};
}

SolveResult solve_unbalanced(const CostMatrix& c, const DiscreteMeasure& a,
                             const DiscreteMeasure& b,
                             const SolverConfig& cfg) {
  cfg.validate();
  check_inputs(c, a, b);

  if (cfg.variant == SolverVariant::uot_textbook) {
    ScalingState st = make_state(c, a, b, cfg.epsilon);
    const double damp = cfg.rho / (cfg.rho + cfg.epsilon);
    SolveDiagnostics diag = iterate(st, damp, cfg.max_iters, cfg.tol);
    TransportPlan plan = assemble_plan(st, "uot_textbook");
    fill_marginal_diag(plan, a, b, diag);
    plan.meta.objective = uot_objective(plan, c, a, b, cfg.rho).value;
    return SolveResult{std::move(plan), diag};
  }

  if (cfg.variant != SolverVariant::uot_paper_pseudocode)
    throw std::invalid_argument(
        "solve_unbalanced handles uot_textbook and uot_paper_pseudocode only");

  // Reference pseudocode, reproduced as written: Z = -C/rho,
  // u = rho (log mu - LSE_j(Z + v)), v = rho (log nu - LSE_i(Z + u)),
  // pi = exp(Z + u (+) v). Note there is no epsilon and no damping.
  const std::size_t n = a.size(), m = b.size();
  ScalingState st;
  st.la = log_vec(a.mass);
  st.lb = log_vec(b.mass);
  st.logK = Mat(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) st.logK(i, j) = -c.m(i, j) / cfg.rho;
  st.logKT = st.logK.transposed();
  st.phi.assign(n, 0.0);
  st.psi.assign(m, 0.0);

  std::vector<double> u_new(n), v_new(m);
  SolveDiagnostics diag;
  double change = kInf;
  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    for (std::size_t i = 0; i < n; ++i)
      u_new[i] = cfg.rho * (st.la[i] -
                            kern::lse_add(st.logK.row(i), st.psi.data(), m));
    for (std::size_t j = 0; j < m; ++j)
      v_new[j] = cfg.rho * (st.lb[j] -
                            kern::lse_add(st.logKT.row(j), u_new.data(), n));
    change = std::max(sup_change(u_new, st.phi), sup_change(v_new, st.psi));
    st.phi.swap(u_new);
    st.psi.swap(v_new);
    if (change < cfg.tol) {
      ++it;
      break;
    }
  }
  diag.iterations_used = it;
  diag.final_potential_change = change;
  diag.converged = change < cfg.tol;
  diag.row_potentials = st.phi;
  diag.col_potentials = st.psi;

  TransportPlan plan = assemble_plan(st, "uot_paper_pseudocode");
  fill_marginal_diag(plan, a, b, diag);
  plan.meta.objective = uot_objective(plan, c, a, b, cfg.rho).value;
  return SolveResult{std::move(plan), diag};
}

double generalized_kl(const double* p, const double* q, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (p[i] < 0.0) throw std::invalid_argument("generalized_kl: negative mass");
    if (p[i] == 0.0) {
      acc += q[i];  // 0 log 0 = 0 leaves the +q mass term
    } else if (q[i] == 0.0) {
      return kInf;  // p log(p/0)
    } else {
      acc += p[i] * kern::log_d(p[i] / q[i]) - p[i] + q[i];
    }
  }
  return acc;
}

UotObjective uot_objective(const TransportPlan& plan, const CostMatrix& c,
                           const DiscreteMeasure& a, const DiscreteMeasure& b,
                           double rho) {
  if (plan.rows() != c.rows() || plan.cols() != c.cols() ||
      plan.rows() != a.size() || plan.cols() != b.size())
    throw std::invalid_argument("uot_objective: dimension mismatch");
  if (!(rho > 0.0)) throw std::invalid_argument("uot_objective: rho > 0");
  for (std::size_t i = 0; i < plan.m.size(); ++i)
    if (plan.m.data()[i] < 0.0)
      throw std::invalid_argument("uot_objective: plan must be nonnegative");

  const std::size_t n = plan.rows(), m = plan.cols();
  std::vector<double> r(n), s(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) r[i] = kern::sum(plan.m.row(i), m);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < n; ++i) s[j] += plan.m(i, j);

  const double kr = generalized_kl(r.data(), a.mass.data(), n);
  const double kc = generalized_kl(s.data(), b.mass.data(), m);
  if (std::isinf(kr) || std::isinf(kc)) return UotObjective{kInf, false};
  const double cost = kern::dot(c.m.data(), plan.m.data(), plan.m.size());
  return UotObjective{cost + rho * kr + rho * kc, true};
}

}  // namespace fgw
