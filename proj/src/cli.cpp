#include "fgw/cli.hpp"

#include <algorithm>
#include <cmath>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <numeric>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "fgw/gw.hpp"
#include "fgw/io.hpp"
#include "fgw/pipeline.hpp"
#include "fgw/sinkhorn.hpp"
#include "fgw/synth.hpp"

namespace fs = std::filesystem;

namespace fgw::cli {
namespace {

using io::fmt_double;

struct MatchOptions {
  std::string bundle, batch_dir, out_dir;
  std::string out_plan, out_labels, out_diag;
  double alpha = 0.3;
  double rho = 0.75;
  double epsilon = 1.0;
  int anchors = 64;
  int iters = 5;
  int topk = 3;
  double quantile = 0.01;
  std::string solver = "textbook";
  std::string anchor_ranking = "confidence";
  double tol = 1e-9;
  int max_iters = 1000;
  bool no_relaxed_cc = false;
};

PipelineConfig pipeline_config(const MatchOptions& o) {
  PipelineConfig cfg;
  cfg.iters_T = o.iters;
  cfg.fusion.alpha = o.alpha;
  cfg.anchor.k = o.anchors;
  cfg.anchor.quantile = o.quantile;
  cfg.anchor.ranking = o.anchor_ranking == "combined"
                           ? AnchorRanking::combined
                           : AnchorRanking::confidence;
  cfg.solver.rho = o.rho;
  cfg.solver.epsilon = o.epsilon;
  cfg.solver.tol = o.tol;
  cfg.solver.max_iters = o.max_iters;
  cfg.solver.variant = solver_variant_from_name(o.solver);
  cfg.topk = o.topk;
  cfg.relaxed_cc = !o.no_relaxed_cc;
  cfg.validate();
  return cfg;
}

// row-argmax matches of a plan, ties toward the lowest target index
std::vector<Match> argmax_matches(const TransportPlan& plan) {
  std::vector<Match> out;
  out.reserve(plan.rows());
  for (std::size_t i = 0; i < plan.rows(); ++i) {
    int best = 0;
    double bv = plan.m(i, 0);
    for (std::size_t j = 1; j < plan.cols(); ++j)
      if (plan.m(i, j) > bv) {
        bv = plan.m(i, j);
        best = static_cast<int>(j);
      }
    out.push_back(Match{static_cast<int>(i), best, bv});
  }
  return out;
}

std::string metrics_line(const Metrics& m) {
  std::ostringstream ss;
  ss << "metrics emitted " << m.emitted << " assigned " << m.assigned
     << " precision "
     << (m.precision_defined ? fmt_double(m.precision) : std::string("null"))
     << " recall " << fmt_double(m.recall) << " accuracy "
     << fmt_double(m.accuracy);
  return ss.str();
}

std::vector<std::string> pipeline_warnings(const PipelineResult& res) {
  std::vector<std::string> w;
  for (const StageDiagnostics& d : res.stages) {
    std::ostringstream ss;
    if (!d.solve.converged) {
      ss << "not_converged stage " << d.stage;
      w.push_back(ss.str());
    } else if (d.anchor_fallback) {
      ss << "anchor_fallback stage " << d.stage;
      w.push_back(ss.str());
    } else if (d.anchor_shortfall) {
      ss << "anchor_shortfall stage " << d.stage;
      w.push_back(ss.str());
    }
  }
  return w;
}

std::string default_out(const std::string& bundle_path, const char* ext) {
  fs::path p(bundle_path);
  p.replace_extension(ext);
  return p.string();
}

// one bundle through the pipeline; returns the summary line
std::string match_one(const std::string& bundle_path, const MatchOptions& o,
                      const PipelineConfig& cfg, const std::string& out_plan,
                      const std::string& out_labels,
                      const std::string& out_diag) {
  const io::PairBundle bundle = io::read_bundle(bundle_path);
  PipelineResult res = run_pipeline(bundle.problem, cfg);
  const PseudoLabels labels = extract_pseudo_labels(res.final_plan, cfg);

  io::write_plan(out_plan, res.final_plan);
  io::write_labels(out_labels, labels, o.topk);
  io::write_diagnostics(out_diag, res.stages, pipeline_warnings(res));

  int kept = 0;
  for (auto k : labels.kept_mask) kept += k ? 1 : 0;
  std::ostringstream ss;
  ss << "match " << bundle_path << " solver "
     << res.final_plan.meta.solver << " stages " << cfg.iters_T
     << " objective " << fmt_double(res.final_plan.meta.objective)
     << " labels_kept " << kept << " warnings "
     << (res.any_warning() ? 1 : 0);
  return ss.str();
}

int cmd_synth(const Scenario& scn, std::string out_path, std::ostream& out) {
  SynthInstance inst = generate(scn);
  if (out_path.empty()) {
    std::ostringstream name;
    name << scenario_kind_name(scn.kind) << "-n" << scn.n_points << "-s"
         << scn.seed << ".fgwb";
    out_path = name.str();
  }
  io::write_bundle(out_path,
                   io::PairBundle{inst.problem, scn, std::move(inst.gt)});
  const io::PairBundle back = io::read_bundle(out_path);
  out << "bundle " << out_path << " scenario " << scenario_kind_name(scn.kind)
      << " n " << back.problem.n() << " m " << back.problem.m() << " d "
      << back.problem.featA.dim() << " seed " << scn.seed << " assigned "
      << (back.gt ? back.gt->assigned_count() : 0) << "\n";
  return 0;
}

int cmd_match(const MatchOptions& o, std::ostream& out) {
  const PipelineConfig cfg = pipeline_config(o);

  if (o.batch_dir.empty()) {
    const std::string plan_p =
        o.out_plan.empty() ? default_out(o.bundle, ".plan") : o.out_plan;
    const std::string labels_p =
        o.out_labels.empty() ? default_out(o.bundle, ".labels") : o.out_labels;
    const std::string diag_p =
        o.out_diag.empty() ? default_out(o.bundle, ".diag") : o.out_diag;
    out << match_one(o.bundle, o, cfg, plan_p, labels_p, diag_p) << "\n";
    return 0;
  }

  // batch: every *.fgwb in the directory, deterministic order, one pipeline
  // per worker, no shared mutable state
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(o.batch_dir))
    if (e.is_regular_file() && e.path().extension() == ".fgwb")
      files.push_back(e.path().string());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::invalid_argument("batch: no .fgwb files found");

  const fs::path out_dir = o.out_dir.empty() ? fs::path(o.batch_dir)
                                             : fs::path(o.out_dir);
  fs::create_directories(out_dir);

  std::size_t workers = std::thread::hardware_concurrency();
  if (const char* env = std::getenv("FGW_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) workers = static_cast<std::size_t>(v);
  }
  workers = std::min(workers == 0 ? std::size_t{1} : workers, files.size());

  std::vector<std::string> lines(files.size());
  std::vector<std::string> errors(files.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= files.size()) return;
      const fs::path stem = fs::path(files[i]).stem();
      try {
        lines[i] = match_one(
            files[i], o, cfg, (out_dir / stem).string() + ".plan",
            (out_dir / stem).string() + ".labels",
            (out_dir / stem).string() + ".diag");
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  bool failed = false;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (!errors[i].empty()) {
      out << "match " << files[i] << " error " << errors[i] << "\n";
      failed = true;
    } else {
      out << lines[i] << "\n";
    }
  }
  return failed ? 1 : 0;
}

int cmd_eval(const std::string& bundle_path, const std::string& labels_path,
             double radius, bool series, const MatchOptions& o,
             std::ostream& out, std::ostream& err) {
  const io::PairBundle bundle = io::read_bundle(bundle_path);
  if (!bundle.gt) {
    err << "eval: bundle has no ground truth\n";
    return 2;
  }
  const GroundTruth& gt = *bundle.gt;
  const PointSet3D& ptsB = bundle.problem.ptsB;

  if (labels_path.empty() && !series) {
    err << "eval: nothing to do; give --labels and/or --series\n";
    return 2;
  }

  if (!labels_path.empty()) {
    const PseudoLabels labels = io::read_labels(labels_path);
    out << metrics_line(evaluate(labels, gt, radius, ptsB)) << "\n";
  }

  if (series) {
    // the four-bar comparison: NN, semantic OT, fused OT, fused UOT
    const auto acc = [&](const std::vector<Match>& m) {
      return evaluate(m, gt, radius, ptsB).accuracy;
    };
    out << "series nn "
        << fmt_double(acc(infer_matches(bundle.problem.featA,
                                        bundle.problem.featB)))
        << "\n";

    PipelineConfig cfg = pipeline_config(o);
    SolverConfig bal = cfg.solver;
    bal.variant = SolverVariant::balanced;
    const CostMatrix c_sem = minmax_normalize(
        semantic_cost(bundle.problem.featA, bundle.problem.featB));
    out << "series semantic_ot "
        << fmt_double(acc(argmax_matches(
               solve_balanced(c_sem, bundle.problem.massA,
                              bundle.problem.massB, bal)
                   .plan)))
        << "\n";

    PipelineConfig cfg_bal = cfg;
    cfg_bal.solver.variant = SolverVariant::balanced;
    out << "series fused_ot "
        << fmt_double(
               acc(argmax_matches(run_pipeline(bundle.problem, cfg_bal)
                                      .final_plan)))
        << "\n";

    const PipelineResult uot = run_pipeline(bundle.problem, cfg);
    out << "series fused_uot "
        << fmt_double(acc(argmax_matches(uot.final_plan))) << "\n";
    for (std::size_t t = 0; t < uot.stage_plans.size(); ++t)
      out << "stage_accuracy " << t << ' '
          << fmt_double(acc(argmax_matches(uot.stage_plans[t]))) << "\n";
  }
  return 0;
}

int cmd_oracle(const std::string& bundle_path, const std::string& plan_path,
               double epsilon, int max_iters, std::ostream& out,
               std::ostream& err) {
  const io::PairBundle bundle = io::read_bundle(bundle_path);
  const std::size_t n = bundle.problem.n(), m = bundle.problem.m();
  bool did_something = false;

  if (!plan_path.empty()) {
    if (n * m > 4096) {
      err << "oracle: N*M > 4096 exceeds the exact-GW size guard\n";
      return 2;
    }
    const TransportPlan plan = io::read_plan(plan_path);
    const DistanceMatrix dA = pairwise_distances(bundle.problem.ptsA);
    const DistanceMatrix dB = pairwise_distances(bundle.problem.ptsB);
    out << "oracle gw " << fmt_double(gw_objective_exact(plan, dA, dB))
        << "\n";
    did_something = true;
  }

  bool uniform_masses = true;
  for (double v : bundle.problem.massA.mass)
    uniform_masses = uniform_masses && std::fabs(v - 1.0 / static_cast<double>(n)) <= 1e-12;
  for (double v : bundle.problem.massB.mass)
    uniform_masses = uniform_masses && std::fabs(v - 1.0 / static_cast<double>(m)) <= 1e-12;

  if (n == m && n <= 7 && uniform_masses) {
    // exact LP by permutation enumeration; permutation plans are the
    // polytope vertices only for uniform masses
    const CostMatrix c =
        semantic_cost(bundle.problem.featA, bundle.problem.featB);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
      double v = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        v += c.m(i, static_cast<std::size_t>(perm[i]));
      best = std::min(best, v / static_cast<double>(n));
    } while (std::next_permutation(perm.begin(), perm.end()));

    SolverConfig cfg;
    cfg.epsilon = epsilon;
    cfg.max_iters = max_iters;
    cfg.variant = SolverVariant::balanced;
    const SolveResult res =
        solve_balanced(c, bundle.problem.massA, bundle.problem.massB, cfg);
    const double gap = best > 0.0
                           ? (res.plan.meta.objective - best) / best
                           : res.plan.meta.objective - best;
    out << "oracle lp " << fmt_double(best) << " sinkhorn "
        << fmt_double(res.plan.meta.objective) << " rel_gap "
        << fmt_double(gap) << "\n";
    did_something = true;
  } else if (plan_path.empty()) {
    err << "oracle: permutation LP needs n == m <= 7 (give --plan for GW)\n";
    return 2;
  }

  return did_something ? 0 : 2;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Fused Gromov-Wasserstein correspondence engine"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic pair bundle");
  std::string scenario_name = "rigid", synth_out;
  Scenario scn;
  synth->add_option("--scenario", scenario_name,
                    "rigid|mirror_alias|partial_overlap|noisy|broken_structure");
  synth->add_option("--n", scn.n_points, "point count");
  synth->add_option("--seed", scn.seed, "RNG seed");
  synth->add_option("--dim", scn.feature_dim, "feature dimension");
  synth->add_option("--noise", scn.noise_sigma, "noise sigma");
  synth->add_option("--overlap", scn.overlap_fraction, "overlap fraction");
  synth->add_option("--alias", scn.alias_fraction, "alias fraction");
  synth->add_option("--out", synth_out, "output bundle path");

  // match
  auto* match = app.add_subcommand("match", "run the FGW pseudo-label pipeline");
  MatchOptions mo;
  match->add_option("--bundle", mo.bundle, "input bundle");
  match->add_option("--batch", mo.batch_dir, "directory of bundles");
  match->add_option("--out-dir", mo.out_dir, "output directory for batch");
  match->add_option("--out-plan", mo.out_plan, "plan output path");
  match->add_option("--out-labels", mo.out_labels, "labels output path");
  match->add_option("--out-diag", mo.out_diag, "diagnostics output path");
  match->add_option("--alpha", mo.alpha, "semantic/geometric fusion weight");
  match->add_option("--rho", mo.rho, "UOT marginal relaxation");
  match->add_option("--epsilon", mo.epsilon, "entropic regularization");
  match->add_option("--anchors", mo.anchors, "anchors per iteration");
  match->add_option("--iters", mo.iters, "refinement steps");
  match->add_option("--topk", mo.topk, "pseudo-label candidates per source");
  match->add_option("--quantile", mo.quantile, "cycle-error threshold quantile");
  match->add_option("--solver", mo.solver,
                    "textbook|paper-pseudocode|balanced");
  match->add_option("--anchor-ranking", mo.anchor_ranking,
                    "confidence|combined");
  match->add_option("--tol", mo.tol, "potential-change tolerance");
  match->add_option("--max-iters", mo.max_iters, "Sinkhorn iteration cap");
  match->add_flag("--no-relaxed-cc", mo.no_relaxed_cc,
                  "skip the mutual top-k filter");

  // eval
  auto* eval = app.add_subcommand("eval", "score labels against ground truth");
  std::string eval_bundle, eval_labels;
  double radius = 1e-9;
  bool series = false;
  MatchOptions eo;
  eval->add_option("--bundle", eval_bundle, "bundle with ground truth")
      ->required();
  eval->add_option("--labels", eval_labels, "labels file");
  eval->add_option("--radius", radius, "3D correctness radius");
  eval->add_flag("--series", series,
                 "emit the NN / semantic OT / fused OT / fused UOT series");
  eval->add_option("--alpha", eo.alpha, "fusion weight for --series");
  eval->add_option("--rho", eo.rho, "UOT relaxation for --series");
  eval->add_option("--epsilon", eo.epsilon, "entropic reg for --series");
  eval->add_option("--anchors", eo.anchors, "anchor count for --series");
  eval->add_option("--iters", eo.iters, "refinement steps for --series");

  // oracle
  auto* oracle = app.add_subcommand("oracle", "exact GW / permutation-LP checks");
  std::string ob, op;
  double oeps = 0.01;
  int omax = 100000;
  oracle->add_option("--bundle", ob, "input bundle")->required();
  oracle->add_option("--plan", op, "plan file for the exact GW value");
  oracle->add_option("--epsilon", oeps, "Sinkhorn epsilon for the LP gap");
  oracle->add_option("--max-iters", omax, "Sinkhorn iteration cap");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return 2;
  }

  try {
    if (synth->parsed()) {
      scn.kind = scenario_kind_from_name(scenario_name);
      return cmd_synth(scn, synth_out, out);
    }
    if (match->parsed()) {
      if (mo.bundle.empty() == mo.batch_dir.empty()) {
        err << "match: exactly one of --bundle or --batch is required\n";
        return 2;
      }
      return cmd_match(mo, out);
    }
    if (eval->parsed())
      return cmd_eval(eval_bundle, eval_labels, radius, series, eo, out, err);
    if (oracle->parsed()) return cmd_oracle(ob, op, oeps, omax, out, err);
  } catch (const io::IoError& e) {
    err << "io error: " << e.what() << "\n";
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "io error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace fgw::cli
