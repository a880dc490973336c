#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fgw/gw.hpp"
#include "fgw/synth.hpp"
#include "oracle_helpers.hpp"

using namespace fgw;

namespace {

TransportPlan uniform_diag_plan(std::size_t n) {
  TransportPlan p;
  p.m = Mat(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) p.m(i, i) = 1.0 / static_cast<double>(n);
  return p;
}

AnchorSet anchors_of(std::initializer_list<std::pair<int, int>> pairs) {
  AnchorSet a;
  for (auto [s, t] : pairs) a.pairs.push_back(AnchorPair{s, t, 0.0, 0.0});
  return a;
}

}  // namespace

TEST_CASE("gw objective: a space matched to itself has zero distortion") {
  Rng rng(81);
  const Mat pts = oracle::random_matrix(5, 3, rng, -2.0, 2.0);
  PointSet3D p;
  for (std::size_t i = 0; i < 5; ++i)
    p.pts.push_back(Vec3{pts(i, 0), pts(i, 1), pts(i, 2)});
  const DistanceMatrix d = pairwise_distances(p);
  CHECK(gw_objective_exact(uniform_diag_plan(5), d, d) == 0.0);
}

TEST_CASE("gw objective: hand-expanded two-point case") {
  DistanceMatrix dA{Mat::from_rows({{0.0, 1.0}, {1.0, 0.0}})};
  DistanceMatrix dB{Mat::from_rows({{0.0, 2.0}, {2.0, 0.0}})};
  // 16-term sum: only ((0,0),(1,1)) and ((1,1),(0,0)) are nonzero:
  // 2 * |1-2| * (1/2)(1/2) = 0.5
  CHECK(gw_objective_exact(uniform_diag_plan(2), dA, dB) == 0.5);
}

TEST_CASE("gw objective: zero for the true pairing of a rigidly moved cloud") {
  for (std::uint64_t seed : {1, 2, 3}) {
    Scenario scn;
    scn.kind = ScenarioKind::rigid;
    scn.n_points = 5;
    scn.seed = seed;
    const SynthInstance inst = generate(scn);
    const DistanceMatrix dA = pairwise_distances(inst.problem.ptsA);
    const DistanceMatrix dB = pairwise_distances(inst.problem.ptsB);
    CHECK(std::fabs(gw_objective_exact(uniform_diag_plan(5), dA, dB)) <= 1e-9);
  }
}

TEST_CASE("gw objective equals the scalar quadruple-loop oracle bitwise") {
  Rng rng(82);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng.index(5);  // 2..6
    const std::size_t m = 2 + rng.index(5);
    PointSet3D pa, pb;
    for (std::size_t i = 0; i < n; ++i)
      pa.pts.push_back(
          Vec3{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
    for (std::size_t j = 0; j < m; ++j)
      pb.pts.push_back(
          Vec3{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
    const DistanceMatrix dA = pairwise_distances(pa);
    const DistanceMatrix dB = pairwise_distances(pb);
    TransportPlan plan;
    plan.m = oracle::random_matrix(n, m, rng, 0.0, 1.0);
    const double got = gw_objective_exact(plan, dA, dB);
    const double want = oracle::gw_quadruple(plan.m, dA.m, dB.m);
    CHECK(got == want);
  }
}

TEST_CASE("gw objective size guard") {
  DistanceMatrix big{Mat(65, 65, 0.0)};
  TransportPlan p;
  p.m = Mat(65, 65, 0.0);
  CHECK_THROWS_AS(gw_objective_exact(p, big, big), std::invalid_argument);
}

TEST_CASE("linearized cost: identical spaces with true anchors zero out the diagonal") {
  Rng rng(83);
  PointSet3D p;
  for (int i = 0; i < 6; ++i)
    p.pts.push_back(
        Vec3{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
  const DistanceMatrix d = pairwise_distances(p);
  const CostMatrix c =
      linearized_geo_cost(d, d, anchors_of({{0, 0}, {2, 2}, {5, 5}}));
  CHECK(c.kind == CostKind::geometric);
  for (std::size_t i = 0; i < 6; ++i) CHECK(c.m(i, i) == 0.0);
}

TEST_CASE("linearized cost: single-anchor 1D example") {
  // A = {0,1,2}, B = {0,1,3} on a line, anchor (0,0)
  PointSet3D pa{{Vec3{0, 0, 0}, Vec3{1, 0, 0}, Vec3{2, 0, 0}}};
  PointSet3D pb{{Vec3{0, 0, 0}, Vec3{1, 0, 0}, Vec3{3, 0, 0}}};
  const CostMatrix c = linearized_geo_cost(
      pairwise_distances(pa), pairwise_distances(pb), anchors_of({{0, 0}}));
  CHECK(c.m(2, 2) == 1.0);  // |2 - 3|
  CHECK(c.m(1, 1) == 0.0);  // |1 - 1|
  CHECK(c.m(0, 0) == 0.0);
}

TEST_CASE("linearized cost is invariant to rigid motion of either side") {
  Scenario scn;
  scn.kind = ScenarioKind::rigid;
  scn.n_points = 8;
  scn.seed = 7;
  const SynthInstance inst = generate(scn);
  const DistanceMatrix dA = pairwise_distances(inst.problem.ptsA);
  const DistanceMatrix dB = pairwise_distances(inst.problem.ptsB);
  const AnchorSet a = anchors_of({{0, 0}, {3, 3}, {6, 6}});
  const CostMatrix self = linearized_geo_cost(dA, dA, a);
  const CostMatrix moved = linearized_geo_cost(dA, dB, a);
  for (std::size_t i = 0; i < self.m.size(); ++i)
    CHECK(std::fabs(self.m.data()[i] - moved.m.data()[i]) <= 1e-9);
}

TEST_CASE("linearized cost input guards") {
  DistanceMatrix d{Mat(3, 3, 0.0)};
  CHECK_THROWS_AS(linearized_geo_cost(d, d, AnchorSet{}),
                  std::invalid_argument);
  CHECK_THROWS_AS(linearized_geo_cost(d, d, anchors_of({{0, 5}})),
                  std::invalid_argument);
}

TEST_CASE("fusion: endpoints are exact, midpoint is the stated blend") {
  Rng rng(84);
  const CostMatrix sem =
      minmax_normalize(CostMatrix{oracle::random_matrix(4, 5, rng),
                                  CostKind::semantic});
  const CostMatrix geo =
      minmax_normalize(CostMatrix{oracle::random_matrix(4, 5, rng),
                                  CostKind::geometric});

  const CostMatrix at0 = fuse_costs(sem, geo, FusionConfig{0.0});
  CHECK(at0.m == sem.m);
  CHECK(at0.kind == CostKind::fused);
  const CostMatrix at1 = fuse_costs(sem, geo, FusionConfig{1.0});
  CHECK(at1.m == geo.m);

  // alpha = 0.3, sem entry 1, geo entry 0 -> 0.7
  CostMatrix s1{Mat(1, 1, 1.0), CostKind::semantic};
  CostMatrix g0{Mat(1, 1, 0.0), CostKind::geometric};
  const CostMatrix mid = fuse_costs(s1, g0, FusionConfig{0.3});
  CHECK(mid.m(0, 0) == doctest::Approx(0.7).epsilon(1e-15));

  // entries stay inside [0, 1]
  const CostMatrix half = fuse_costs(sem, geo, FusionConfig{0.5});
  for (std::size_t i = 0; i < half.m.size(); ++i) {
    CHECK(half.m.data()[i] >= 0.0);
    CHECK(half.m.data()[i] <= 1.0);
  }
}

TEST_CASE("fusion rejects unnormalized inputs and shape mismatches") {
  CostMatrix ok{Mat(2, 2, 0.5), CostKind::semantic};
  CostMatrix big{Mat(2, 2, 1.5), CostKind::geometric};
  CHECK_THROWS_AS(fuse_costs(ok, big, FusionConfig{0.3}),
                  std::invalid_argument);
  CostMatrix other{Mat(2, 3, 0.5), CostKind::geometric};
  CHECK_THROWS_AS(fuse_costs(ok, other, FusionConfig{0.3}),
                  std::invalid_argument);
  CHECK_THROWS_AS(fuse_costs(ok, ok, FusionConfig{1.5}), std::invalid_argument);
}

TEST_CASE("fusion preserves per-row argmin when both costs rank alike") {
  Rng rng(85);
  Mat base = oracle::random_matrix(5, 6, rng);
  // geo = monotone transform of sem: same ranking per row
  Mat geo_raw(5, 6);
  for (std::size_t i = 0; i < base.size(); ++i)
    geo_raw.data()[i] = base.data()[i] * base.data()[i];
  const CostMatrix sem =
      minmax_normalize(CostMatrix{base, CostKind::semantic});
  const CostMatrix geo =
      minmax_normalize(CostMatrix{geo_raw, CostKind::geometric});
  const CostMatrix fused = fuse_costs(sem, geo, FusionConfig{0.3});
  for (std::size_t i = 0; i < 5; ++i) {
    std::size_t amin_sem = 0, amin_fused = 0;
    for (std::size_t j = 1; j < 6; ++j) {
      if (sem.m(i, j) < sem.m(i, amin_sem)) amin_sem = j;
      if (fused.m(i, j) < fused.m(i, amin_fused)) amin_fused = j;
    }
    CHECK(amin_sem == amin_fused);
  }
}

TEST_CASE("linear and quadratic objectives agree at the distortion-free point") {
  // ground-truth anchors on a rigid pair: <C_geo, pi_gt> = 0 and the exact
  // GW objective of pi_gt is 0 as well
  Scenario scn;
  scn.kind = ScenarioKind::rigid;
  scn.n_points = 6;
  scn.seed = 17;
  const SynthInstance inst = generate(scn);
  const DistanceMatrix dA = pairwise_distances(inst.problem.ptsA);
  const DistanceMatrix dB = pairwise_distances(inst.problem.ptsB);
  AnchorSet gt_anchors;
  for (int i = 0; i < 6; ++i)
    gt_anchors.pairs.push_back(AnchorPair{i, i, 1.0 / 6, 0.0});
  const CostMatrix geo = linearized_geo_cost(dA, dB, gt_anchors);
  const TransportPlan gt_plan = uniform_diag_plan(6);
  CHECK(std::fabs(oracle::frobenius_naive(geo.m, gt_plan.m)) <= 1e-9);
  CHECK(std::fabs(gw_objective_exact(gt_plan, dA, dB)) <= 1e-9);
}
