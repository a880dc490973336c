#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "fgw/sinkhorn.hpp"
#include "fgw/synth.hpp"
#include "oracle_helpers.hpp"

using namespace fgw;

namespace {

Scenario scenario(ScenarioKind kind, int n, std::uint64_t seed,
                  double noise = 0.0) {
  Scenario s;
  s.kind = kind;
  s.n_points = n;
  s.seed = seed;
  s.noise_sigma = noise;
  return s;
}

}  // namespace

TEST_CASE("generation is bit-deterministic for a fixed seed") {
  for (auto kind : {ScenarioKind::rigid, ScenarioKind::mirror_alias,
                    ScenarioKind::partial_overlap, ScenarioKind::noisy,
                    ScenarioKind::broken_structure}) {
    const Scenario s = scenario(kind, 25, 42, 0.15);
    const SynthInstance a = generate(s);
    const SynthInstance b = generate(s);
    CHECK(a.problem.featA.data() == b.problem.featA.data());
    CHECK(a.problem.featB.data() == b.problem.featB.data());
    CHECK(a.problem.ptsA.pts == b.problem.ptsA.pts);
    CHECK(a.problem.ptsB.pts == b.problem.ptsB.pts);
    CHECK(a.gt.target_of_source == b.gt.target_of_source);
    // different seeds give different data
    Scenario s2 = s;
    s2.seed = 43;
    const SynthInstance c = generate(s2);
    CHECK(!(a.problem.featA.data() == c.problem.featA.data()));
  }
}

TEST_CASE("rigid, zero noise: semantic cost has a strict minimum at the truth") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SynthInstance inst = generate(scenario(ScenarioKind::rigid, 20, seed));
    const CostMatrix c =
        semantic_cost(inst.problem.featA, inst.problem.featB);
    for (std::size_t i = 0; i < 20; ++i) {
      const auto truth = static_cast<std::size_t>(
          inst.gt.target_of_source[i]);
      for (std::size_t j = 0; j < 20; ++j)
        if (j != truth) CHECK(c.m(i, truth) < c.m(i, j));
    }
  }
}

TEST_CASE("rigid: target is an exact isometry of the source") {
  const SynthInstance inst = generate(scenario(ScenarioKind::rigid, 16, 7));
  const DistanceMatrix dA = pairwise_distances(inst.problem.ptsA);
  const DistanceMatrix dB = pairwise_distances(inst.problem.ptsB);
  for (std::size_t i = 0; i < 16; ++i)
    for (std::size_t k = 0; k < 16; ++k)
      CHECK(std::fabs(dA(i, k) - dB(i, k)) <= 1e-9);
}

TEST_CASE("mirror_alias, full aliasing: the semantic tie is exact") {
  Scenario s = scenario(ScenarioKind::mirror_alias, 64, 3);
  s.alias_fraction = 1.0;
  const SynthInstance inst = generate(s);
  const std::size_t n = inst.problem.n();
  CHECK(n == 64);  // 8x8 grid is already mirror-closed
  const CostMatrix c = semantic_cost(inst.problem.featA, inst.problem.featB);
  // twin of index p on a width-8 row-major grid
  const auto twin = [](std::size_t p) { return (p / 8) * 8 + (7 - p % 8); };
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(c.m(i, i) == c.m(i, twin(i)));
    CHECK(inst.problem.ptsA.pts[i] != inst.problem.ptsA.pts[twin(i)]);
  }
}

TEST_CASE("mirror_alias rounds the point count up to mirror-closed rows") {
  const SynthInstance inst =
      generate(scenario(ScenarioKind::mirror_alias, 30, 1));
  // ceil(sqrt(30)) = 6 (even), 5 full rows of 6
  CHECK(inst.problem.n() == 30);
  const SynthInstance odd =
      generate(scenario(ScenarioKind::mirror_alias, 26, 1));
  CHECK(odd.problem.n() == 30);  // rounded up to full rows
}

TEST_CASE("partial_overlap: exactly the stated number of assigned pairs") {
  Scenario s = scenario(ScenarioKind::partial_overlap, 32, 1);
  s.overlap_fraction = 0.5;
  const SynthInstance inst = generate(s);
  CHECK(inst.problem.n() == 32);
  CHECK(inst.problem.m() == 32);
  CHECK(inst.gt.assigned_count() == 16);
  CHECK(inst.gt.unmatched_targets.size() == 16);
  // assignment is injective
  std::set<int> targets;
  for (int t : inst.gt.target_of_source)
    if (t >= 0) CHECK(targets.insert(t).second);
  // unmatched targets disjoint from assigned ones
  for (int t : inst.gt.unmatched_targets) CHECK(!targets.count(t));
}

TEST_CASE("partial_overlap: UOT sheds mass on unmatched targets") {
  // mass-exclusion behavior, averaged over 20 seeds: the mean plan mass
  // landing on a distractor column stays below the mean on a true column
  double matched_mass = 0.0, unmatched_mass = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Scenario s = scenario(ScenarioKind::partial_overlap, 32, seed, 0.1);
    s.overlap_fraction = 0.5;
    const SynthInstance inst = generate(s);
    const CostMatrix c = minmax_normalize(
        semantic_cost(inst.problem.featA, inst.problem.featB));
    SolverConfig cfg;  // textbook UOT, rho .75, eps 1
    const auto res =
        solve_unbalanced(c, inst.problem.massA, inst.problem.massB, cfg);
    std::set<int> unmatched(inst.gt.unmatched_targets.begin(),
                            inst.gt.unmatched_targets.end());
    for (std::size_t j = 0; j < inst.problem.m(); ++j) {
      double col = 0.0;
      for (std::size_t i = 0; i < inst.problem.n(); ++i) col += res.plan.m(i, j);
      if (unmatched.count(static_cast<int>(j)))
        unmatched_mass += col;
      else
        matched_mass += col;
    }
  }
  CHECK(unmatched_mass / 20 < matched_mass / 20);
}

TEST_CASE("noisy: jitter moves the target cloud off the exact isometry") {
  const SynthInstance inst =
      generate(scenario(ScenarioKind::noisy, 16, 7, 0.05));
  const DistanceMatrix dA = pairwise_distances(inst.problem.ptsA);
  const DistanceMatrix dB = pairwise_distances(inst.problem.ptsB);
  double max_dev = 0.0;
  for (std::size_t i = 0; i < 16; ++i)
    for (std::size_t k = 0; k < 16; ++k)
      max_dev = std::max(max_dev, std::fabs(dA(i, k) - dB(i, k)));
  CHECK(max_dev > 1e-3);
  CHECK(max_dev < 1.0);
}

TEST_CASE("broken_structure: the component moves, the rest stays rigid") {
  const SynthInstance inst =
      generate(scenario(ScenarioKind::broken_structure, 36, 5));
  // distances inside the untouched block are preserved; distances that
  // cross into the displaced component are generally not
  const DistanceMatrix dA = pairwise_distances(inst.problem.ptsA);
  const DistanceMatrix dB = pairwise_distances(inst.problem.ptsB);
  // columns 0..3 of a 6-wide grid are untouched, 4..5 displaced
  double intact_dev = 0.0, cross_dev = 0.0;
  for (std::size_t i = 0; i < 36; ++i)
    for (std::size_t k = 0; k < 36; ++k) {
      const bool bi = i % 6 >= 4, bk = k % 6 >= 4;
      const double dev = std::fabs(dA(i, k) - dB(i, k));
      if (!bi && !bk) intact_dev = std::max(intact_dev, dev);
      if (bi != bk) cross_dev = std::max(cross_dev, dev);
    }
  CHECK(intact_dev <= 1e-9);
  CHECK(cross_dev > 0.1);
}

TEST_CASE("evaluate: perfect labels and empty labels") {
  const SynthInstance inst = generate(scenario(ScenarioKind::rigid, 12, 9));
  std::vector<Match> perfect;
  for (int i = 0; i < 12; ++i)
    perfect.push_back(Match{i, inst.gt.target_of_source[static_cast<std::size_t>(i)], 1.0});
  const Metrics m = evaluate(perfect, inst.gt, 1e-9, inst.problem.ptsB);
  CHECK(m.precision_defined);
  CHECK(m.precision == 1.0);
  CHECK(m.recall == 1.0);
  CHECK(m.accuracy == 1.0);

  const Metrics empty =
      evaluate(std::vector<Match>{}, inst.gt, 1e-9, inst.problem.ptsB);
  CHECK(!empty.precision_defined);
  CHECK(empty.recall == 0.0);

  CHECK_THROWS_AS(evaluate(perfect, inst.gt, 0.0, inst.problem.ptsB),
                  std::invalid_argument);
}

TEST_CASE("evaluate matches an independent scalar-loop scorer") {
  Rng rng(111);
  const SynthInstance inst =
      generate(scenario(ScenarioKind::partial_overlap, 24, 3, 0.2));
  // random matches, some onto unmatched sources
  std::vector<Match> ms;
  for (int i = 0; i < 24; ++i)
    ms.push_back(Match{i, static_cast<int>(rng.index(24)), 0.0});
  const double radius = 0.4;
  const Metrics got = evaluate(ms, inst.gt, radius, inst.problem.ptsB);

  int within = 0, exact = 0, recalled = 0, assigned = 0;
  for (int i = 0; i < 24; ++i) {
    const int truth = inst.gt.target_of_source[static_cast<std::size_t>(i)];
    if (truth < 0) continue;
    ++assigned;
    const auto& pb = inst.problem.ptsB.pts;
    const int j = ms[static_cast<std::size_t>(i)].target;
    const double dx = pb[static_cast<std::size_t>(j)][0] - pb[static_cast<std::size_t>(truth)][0];
    const double dy = pb[static_cast<std::size_t>(j)][1] - pb[static_cast<std::size_t>(truth)][1];
    const double dz = pb[static_cast<std::size_t>(j)][2] - pb[static_cast<std::size_t>(truth)][2];
    const bool in = std::sqrt(dx * dx + dy * dy + dz * dz) <= radius;
    within += in;
    recalled += in;
    exact += j == truth;
  }
  CHECK(got.assigned == assigned);
  CHECK(got.precision ==
        doctest::Approx(static_cast<double>(within) / 24).epsilon(1e-15));
  CHECK(got.recall ==
        doctest::Approx(static_cast<double>(recalled) / assigned).epsilon(1e-15));
  CHECK(got.accuracy ==
        doctest::Approx(static_cast<double>(exact) / assigned).epsilon(1e-15));
}

TEST_CASE("scenario validation") {
  Scenario bad = scenario(ScenarioKind::rigid, 3, 0);
  CHECK_THROWS_AS(generate(bad), std::invalid_argument);
  bad = scenario(ScenarioKind::rigid, 8, 0);
  bad.feature_dim = 1;
  CHECK_THROWS_AS(generate(bad), std::invalid_argument);
  bad = scenario(ScenarioKind::partial_overlap, 8, 0);
  bad.overlap_fraction = 0.0;
  CHECK_THROWS_AS(generate(bad), std::invalid_argument);
}
