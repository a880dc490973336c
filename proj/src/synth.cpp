#include "fgw/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fgw/rng.hpp"

namespace fgw {
namespace {

struct Grid {
  std::vector<double> gx, gy;  // latent 2D coordinates in [-1, 1]
  int side = 0;
};

double lin(int i, int side) {
  return side == 1 ? 0.0 : (2.0 * i) / static_cast<double>(side - 1) - 1.0;
}

// row-major bent grid; takes the first n points of a side x side layout
Grid make_grid(int n, int side) {
  Grid g;
  g.side = side;
  g.gx.resize(static_cast<std::size_t>(n));
  g.gy.resize(static_cast<std::size_t>(n));
  for (int p = 0; p < n; ++p) {
    g.gx[static_cast<std::size_t>(p)] = lin(p % side, side);
    g.gy[static_cast<std::size_t>(p)] = lin(p / side, side);
  }
  return g;
}

Vec3 embed(double gx, double gy) {
  return Vec3{gx, gy, 0.35 * (gx * gx + 0.5 * gy * gy)};
}

// 8 low-degree polynomial basis functions of the latent coordinate
constexpr int kBasis = 8;
void eval_basis(double gx, double gy, double* b) {
  b[0] = 1.0;
  b[1] = gx;
  b[2] = gy;
  b[3] = gx * gy;
  b[4] = gx * gx - 1.0 / 3.0;
  b[5] = gy * gy - 1.0 / 3.0;
  b[6] = gx * gx * gy;
  b[7] = gx * gy * gy;
}

Mat smooth_features(const Grid& g, int d, Rng& rng) {
  Mat coef(kBasis, static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < coef.size(); ++i)
    coef.data()[i] = rng.gaussian();
  Mat f(g.gx.size(), static_cast<std::size_t>(d), 0.0);
  double b[kBasis];
  for (std::size_t p = 0; p < g.gx.size(); ++p) {
    eval_basis(g.gx[p], g.gy[p], b);
    for (int k = 0; k < kBasis; ++k)
      for (int c = 0; c < d; ++c)
        f(p, static_cast<std::size_t>(c)) += b[k] * coef(static_cast<std::size_t>(k), static_cast<std::size_t>(c));
  }
  return f;
}

Mat add_noise(const Mat& f, double sigma, Rng& rng) {
  Mat out = f;
  if (sigma > 0.0)
    for (std::size_t i = 0; i < out.size(); ++i)
      out.data()[i] += sigma * rng.gaussian();
  return out;
}

struct Rigid {
  double r[3][3];
  Vec3 t;

  Vec3 apply(const Vec3& p) const {
    return Vec3{r[0][0] * p[0] + r[0][1] * p[1] + r[0][2] * p[2] + t[0],
                r[1][0] * p[0] + r[1][1] * p[1] + r[1][2] * p[2] + t[1],
                r[2][0] * p[0] + r[2][1] * p[1] + r[2][2] * p[2] + t[2]};
  }
};

Rigid random_rigid(Rng& rng) {
  double q[4];
  double nrm2 = 0.0;
  for (double& v : q) {
    v = rng.gaussian();
    nrm2 += v * v;
  }
  const double inv = 1.0 / std::sqrt(nrm2);
  const double w = q[0] * inv, x = q[1] * inv, y = q[2] * inv, z = q[3] * inv;
  Rigid rt;
  rt.r[0][0] = 1 - 2 * (y * y + z * z);
  rt.r[0][1] = 2 * (x * y - w * z);
  rt.r[0][2] = 2 * (x * z + w * y);
  rt.r[1][0] = 2 * (x * y + w * z);
  rt.r[1][1] = 1 - 2 * (x * x + z * z);
  rt.r[1][2] = 2 * (y * z - w * x);
  rt.r[2][0] = 2 * (x * z - w * y);
  rt.r[2][1] = 2 * (y * z + w * x);
  rt.r[2][2] = 1 - 2 * (x * x + y * y);
  rt.t = Vec3{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
              rng.uniform(-1.0, 1.0)};
  return rt;
}

PointSet3D embed_all(const Grid& g) {
  PointSet3D ps;
  ps.pts.reserve(g.gx.size());
  for (std::size_t p = 0; p < g.gx.size(); ++p)
    ps.pts.push_back(embed(g.gx[p], g.gy[p]));
  return ps;
}

SynthInstance finish(Mat fa, Mat fb, PointSet3D pa, PointSet3D pb,
                     GroundTruth gt) {
  const std::size_t n = fa.rows(), m = fb.rows();
  SynthInstance out{
      PairProblem{FeatureMatrix(std::move(fa)), FeatureMatrix(std::move(fb)),
                  std::move(pa), std::move(pb), DiscreteMeasure::uniform(n),
                  DiscreteMeasure::uniform(m)},
      std::move(gt)};
  out.problem.validate();
  return out;
}

GroundTruth identity_gt(int n) {
  GroundTruth gt;
  gt.target_of_source.resize(static_cast<std::size_t>(n));
  std::iota(gt.target_of_source.begin(), gt.target_of_source.end(), 0);
  return gt;
}

SynthInstance gen_rigid_family(const Scenario& scn, bool jitter_points,
                               bool break_component) {
  Rng rng(scn.seed);
  const int n = scn.n_points;
  const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  const Grid g = make_grid(n, side);
  const Mat f = smooth_features(g, scn.feature_dim, rng);
  Mat fa = add_noise(f, scn.noise_sigma, rng);
  Mat fb = add_noise(f, scn.noise_sigma, rng);
  PointSet3D pa = embed_all(g);
  const Rigid rt = random_rigid(rng);
  PointSet3D pb;
  pb.pts.reserve(pa.pts.size());
  for (const Vec3& p : pa.pts) pb.pts.push_back(rt.apply(p));
  if (jitter_points && scn.noise_sigma > 0.0)
    for (Vec3& p : pb.pts)
      for (double& c : p) c += scn.noise_sigma * rng.gaussian();
  if (break_component) {
    // rightmost ~30% of grid columns move under an independent transform
    const int comp_cols = std::max(1, static_cast<int>(std::lround(0.3 * side)));
    const Rigid rt2 = random_rigid(rng);
    for (int p = 0; p < n; ++p)
      if (p % side >= side - comp_cols)
        pb.pts[static_cast<std::size_t>(p)] =
            rt2.apply(pa.pts[static_cast<std::size_t>(p)]);
  }
  return finish(std::move(fa), std::move(fb), std::move(pa), std::move(pb),
                identity_gt(n));
}

SynthInstance gen_mirror(const Scenario& scn) {
  Rng rng(scn.seed);
  int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(scn.n_points))));
  if (side % 2) ++side;  // even width: symmetric columns, no fixed point
  const int rows = (scn.n_points + side - 1) / side;
  const int n = rows * side;  // full rows keep the cloud mirror-closed
  const Grid g = make_grid(n, side);

  Mat f = smooth_features(g, scn.feature_dim, rng);
  // mirror twin of p shares the row, column reflected
  auto twin = [&](int p) { return (p / side) * side + (side - 1 - p % side); };
  std::vector<int> left;
  for (int p = 0; p < n; ++p)
    if (p % side < side / 2) left.push_back(p);
  rng.shuffle(left.data(), left.size());
  const std::size_t n_alias = static_cast<std::size_t>(
      std::lround(scn.alias_fraction * static_cast<double>(left.size())));
  for (std::size_t a = 0; a < n_alias; ++a) {
    const int p = left[a];
    const int q = twin(p);
    for (int c = 0; c < scn.feature_dim; ++c)
      f(static_cast<std::size_t>(q), static_cast<std::size_t>(c)) =
          f(static_cast<std::size_t>(p), static_cast<std::size_t>(c));
  }

  Mat fa = add_noise(f, scn.noise_sigma, rng);
  Mat fb = add_noise(f, scn.noise_sigma, rng);
  PointSet3D pa = embed_all(g);
  const Rigid rt = random_rigid(rng);
  PointSet3D pb;
  pb.pts.reserve(pa.pts.size());
  for (const Vec3& p : pa.pts) pb.pts.push_back(rt.apply(p));
  return finish(std::move(fa), std::move(fb), std::move(pa), std::move(pb),
                identity_gt(n));
}

SynthInstance gen_partial(const Scenario& scn) {
  Rng rng(scn.seed);
  const int n = scn.n_points;
  const int k = std::max(
      1, static_cast<int>(std::lround(scn.overlap_fraction * n)));
  const int pool = 2 * n - k;
  const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(pool))));
  const Grid g = make_grid(pool, side);
  const Mat f = smooth_features(g, scn.feature_dim, rng);

  // target latents: the k matched sources plus n - k distractors
  std::vector<int> tl;
  for (int i = 0; i < k; ++i) tl.push_back(i);
  for (int i = n; i < pool; ++i) tl.push_back(i);
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order.data(), order.size());

  Mat fa(static_cast<std::size_t>(n), static_cast<std::size_t>(scn.feature_dim));
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < scn.feature_dim; ++c)
      fa(static_cast<std::size_t>(i), static_cast<std::size_t>(c)) =
          f(static_cast<std::size_t>(i), static_cast<std::size_t>(c));
  Mat fb(static_cast<std::size_t>(n), static_cast<std::size_t>(scn.feature_dim));
  for (int p = 0; p < n; ++p) {
    const int lat = tl[static_cast<std::size_t>(order[static_cast<std::size_t>(p)])];
    for (int c = 0; c < scn.feature_dim; ++c)
      fb(static_cast<std::size_t>(p), static_cast<std::size_t>(c)) =
          f(static_cast<std::size_t>(lat), static_cast<std::size_t>(c));
  }
  fa = add_noise(fa, scn.noise_sigma, rng);
  fb = add_noise(fb, scn.noise_sigma, rng);

  PointSet3D pa;
  for (int i = 0; i < n; ++i)
    pa.pts.push_back(embed(g.gx[static_cast<std::size_t>(i)],
                           g.gy[static_cast<std::size_t>(i)]));
  const Rigid rt = random_rigid(rng);
  PointSet3D pb;
  GroundTruth gt;
  gt.target_of_source.assign(static_cast<std::size_t>(n), -1);
  for (int p = 0; p < n; ++p) {
    const int lat = tl[static_cast<std::size_t>(order[static_cast<std::size_t>(p)])];
    pb.pts.push_back(rt.apply(embed(g.gx[static_cast<std::size_t>(lat)],
                                    g.gy[static_cast<std::size_t>(lat)])));
    if (lat < k)
      gt.target_of_source[static_cast<std::size_t>(lat)] = p;
    else
      gt.unmatched_targets.push_back(p);
  }
  return finish(std::move(fa), std::move(fb), std::move(pa), std::move(pb),
                std::move(gt));
}

}  // namespace

const char* scenario_kind_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::rigid: return "rigid";
    case ScenarioKind::mirror_alias: return "mirror_alias";
    case ScenarioKind::partial_overlap: return "partial_overlap";
    case ScenarioKind::noisy: return "noisy";
    case ScenarioKind::broken_structure: return "broken_structure";
  }
  return "?";
}

ScenarioKind scenario_kind_from_name(const std::string& s) {
  if (s == "rigid") return ScenarioKind::rigid;
  if (s == "mirror_alias") return ScenarioKind::mirror_alias;
  if (s == "partial_overlap") return ScenarioKind::partial_overlap;
  if (s == "noisy") return ScenarioKind::noisy;
  if (s == "broken_structure") return ScenarioKind::broken_structure;
  throw std::invalid_argument("unknown scenario kind: " + s);
}

void Scenario::validate() const {
  if (n_points < 4) throw std::invalid_argument("scenario: n_points >= 4");
  if (feature_dim < 2) throw std::invalid_argument("scenario: feature_dim >= 2");
  if (!(noise_sigma >= 0.0))
    throw std::invalid_argument("scenario: noise_sigma >= 0");
  if (!(overlap_fraction > 0.0) || !(overlap_fraction <= 1.0))
    throw std::invalid_argument("scenario: overlap_fraction in (0, 1]");
  if (!(alias_fraction >= 0.0) || !(alias_fraction <= 1.0))
    throw std::invalid_argument("scenario: alias_fraction in [0, 1]");
}

std::size_t GroundTruth::assigned_count() const {
  std::size_t c = 0;
  for (int t : target_of_source)
    if (t >= 0) ++c;
  return c;
}

SynthInstance generate(const Scenario& scn) {
  scn.validate();
  switch (scn.kind) {
    case ScenarioKind::rigid: return gen_rigid_family(scn, false, false);
    case ScenarioKind::noisy: return gen_rigid_family(scn, true, false);
    case ScenarioKind::broken_structure:
      return gen_rigid_family(scn, false, true);
    case ScenarioKind::mirror_alias: return gen_mirror(scn);
    case ScenarioKind::partial_overlap: return gen_partial(scn);
  }
  throw std::invalid_argument("unknown scenario kind");
}

Metrics evaluate(const std::vector<Match>& matches, const GroundTruth& gt,
                 double radius, const PointSet3D& ptsB) {
  if (!(radius > 0.0)) throw std::invalid_argument("evaluate: radius > 0");
  Metrics m;
  m.assigned = static_cast<int>(gt.assigned_count());
  m.emitted = static_cast<int>(matches.size());
  if (matches.empty()) return m;

  int within = 0;
  std::vector<char> src_within(gt.target_of_source.size(), 0);
  std::vector<char> src_exact(gt.target_of_source.size(), 0);
  for (const Match& mt : matches) {
    const int truth = gt.target_of_source[static_cast<std::size_t>(mt.source)];
    if (truth < 0) continue;
    if (mt.target == truth) src_exact[static_cast<std::size_t>(mt.source)] = 1;
    if (dist3(ptsB.pts[static_cast<std::size_t>(mt.target)],
              ptsB.pts[static_cast<std::size_t>(truth)]) <= radius) {
      ++within;
      src_within[static_cast<std::size_t>(mt.source)] = 1;
    }
  }
  m.precision_defined = true;
  m.precision = static_cast<double>(within) / static_cast<double>(m.emitted);
  if (m.assigned > 0) {
    int rec = 0, acc = 0;
    for (std::size_t i = 0; i < gt.target_of_source.size(); ++i) {
      if (gt.target_of_source[i] < 0) continue;
      rec += src_within[i];
      acc += src_exact[i];
    }
    m.recall = static_cast<double>(rec) / static_cast<double>(m.assigned);
    m.accuracy = static_cast<double>(acc) / static_cast<double>(m.assigned);
  }
  return m;
}

Metrics evaluate(const PseudoLabels& labels, const GroundTruth& gt,
                 double radius, const PointSet3D& ptsB) {
  if (!(radius > 0.0)) throw std::invalid_argument("evaluate: radius > 0");
  std::vector<Match> all;
  for (std::size_t i = 0; i < labels.rows(); ++i)
    for (const auto& c : labels.candidates[i])
      all.push_back(Match{static_cast<int>(i), c.target, c.value});
  Metrics m = evaluate(all, gt, radius, ptsB);
  // exact accuracy is judged on the top candidate only
  if (m.assigned > 0) {
    int acc = 0;
    for (const Match& t : top_matches(labels)) {
      const int truth = gt.target_of_source[static_cast<std::size_t>(t.source)];
      if (truth >= 0 && t.target == truth) ++acc;
    }
    m.accuracy = static_cast<double>(acc) / static_cast<double>(m.assigned);
  }
  return m;
}

}  // namespace fgw
