#include "fgw/anchors.hpp"

#include <algorithm>
#include <cmath>

namespace fgw {
namespace {

// argmax over a strided sequence, first maximum wins (lowest index on ties)
int argmax_row(const Mat& m, std::size_t i) {
  int best = 0;
  double bv = m(i, 0);
  for (std::size_t j = 1; j < m.cols(); ++j)
    if (m(i, j) > bv) {
      bv = m(i, j);
      best = static_cast<int>(j);
    }
  return best;
}

int argmax_col(const Mat& m, std::size_t j) {
  int best = 0;
  double bv = m(0, j);
  for (std::size_t i = 1; i < m.rows(); ++i)
    if (m(i, j) > bv) {
      bv = m(i, j);
      best = static_cast<int>(i);
    }
  return best;
}

// lower empirical quantile: sorted[floor(q * (n - 1))]
double quantile_lower(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const std::size_t idx =
      static_cast<std::size_t>(q * static_cast<double>(v.size() - 1));
  return v[idx];
}

}  // namespace

void AnchorConfig::validate() const {
  if (k < 1) throw std::invalid_argument("anchor config: k >= 1");
  if (!(quantile > 0.0) || !(quantile < 1.0))
    throw std::invalid_argument("anchor config: quantile in (0, 1)");
}

AnchorSet select_anchors(const TransportPlan& plan, const PointSet3D& ptsA,
                         const PointSet3D& ptsB, const AnchorConfig& cfg) {
  cfg.validate();
  const std::size_t n = plan.rows(), m = plan.cols();
  if (n != ptsA.size() || m != ptsB.size())
    throw std::invalid_argument("select_anchors: plan/point size mismatch");
  for (std::size_t i = 0; i < plan.m.size(); ++i)
    if (plan.m.data()[i] < 0.0)
      throw std::invalid_argument("select_anchors: plan must be nonnegative");

  std::vector<int> fwd(n), bwd(m);
  for (std::size_t i = 0; i < n; ++i) fwd[i] = argmax_row(plan.m, i);
  for (std::size_t j = 0; j < m; ++j) bwd[j] = argmax_col(plan.m, j);

  std::vector<double> err(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int roundtrip = bwd[static_cast<std::size_t>(fwd[i])];
    err[i] = dist3(ptsA.pts[i], ptsA.pts[static_cast<std::size_t>(roundtrip)]);
  }

  // 1e-9 floor keeps noiseless instances (all errors exactly 0) intact
  const double delta = std::max(quantile_lower(err, cfg.quantile), 1e-9);

  std::vector<int> cand;
  for (std::size_t i = 0; i < n; ++i)
    if (err[i] <= delta) cand.push_back(static_cast<int>(i));
  if (cand.empty()) throw NoAnchorsError();

  auto score = [&](int i) {
    const double conf = plan.m(static_cast<std::size_t>(i),
                               static_cast<std::size_t>(fwd[i]));
    return cfg.ranking == AnchorRanking::combined
               ? conf / (1.0 + err[static_cast<std::size_t>(i)])
               : conf;
  };
  std::sort(cand.begin(), cand.end(), [&](int a, int b) {
    const double sa = score(a), sb = score(b);
    if (sa != sb) return sa > sb;
    return a < b;
  });

  AnchorSet out;
  out.threshold = delta;
  std::vector<char> target_used(m, 0);
  for (int i : cand) {
    if (out.pairs.size() >= static_cast<std::size_t>(cfg.k)) break;
    const int j = fwd[static_cast<std::size_t>(i)];
    if (target_used[static_cast<std::size_t>(j)]) continue;
    target_used[static_cast<std::size_t>(j)] = 1;
    out.pairs.push_back(AnchorPair{
        i, j, plan.m(static_cast<std::size_t>(i), static_cast<std::size_t>(j)),
        err[static_cast<std::size_t>(i)]});
  }
  out.shortfall = out.pairs.size() < static_cast<std::size_t>(cfg.k);
  return out;
}

}  // namespace fgw
