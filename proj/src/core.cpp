#include "fgw/core.hpp"

#include <cmath>
#include <stdexcept>

#include "fgw/kern.hpp"

namespace fgw {

double dist3(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return std::sqrt((dx * dx + dy * dy) + dz * dz);
}

DiscreteMeasure DiscreteMeasure::uniform(std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform measure needs n >= 1");
  return DiscreteMeasure{std::vector<double>(n, 1.0 / static_cast<double>(n))};
}

double DiscreteMeasure::total() const {
  return kern::sum(mass.data(), mass.size());
}

void DiscreteMeasure::validate() const {
  if (mass.empty()) throw std::invalid_argument("empty measure");
  for (double v : mass)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("measure entries must be finite and >= 0");
}

bool DiscreteMeasure::is_probability(double tol) const {
  return std::fabs(total() - 1.0) <= tol;
}

FeatureMatrix::FeatureMatrix(Mat data) : m_(std::move(data)) {
  if (m_.rows() == 0 || m_.cols() == 0)
    throw std::invalid_argument("feature matrix must be non-empty");
  if (!m_.all_finite())
    throw std::invalid_argument("feature matrix has non-finite entries");
}

FeatureMatrix FeatureMatrix::row_normalized() const {
  Mat out = m_;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    double* r = out.row(i);
    const double nrm = std::sqrt(kern::dot(r, r, out.cols()));
    if (!(nrm > 0.0))
      throw std::invalid_argument("zero-norm feature row rejected");
    for (std::size_t j = 0; j < out.cols(); ++j) r[j] /= nrm;
  }
  return FeatureMatrix(std::move(out));
}

void PointSet3D::validate() const {
  if (pts.empty()) throw std::invalid_argument("empty point set");
  for (const Vec3& p : pts)
    for (double v : p)
      if (!std::isfinite(v))
        throw std::invalid_argument("non-finite point coordinate");
}

const char* cost_kind_name(CostKind k) {
  switch (k) {
    case CostKind::semantic: return "semantic";
    case CostKind::geometric: return "geometric";
    case CostKind::fused: return "fused";
  }
  return "?";
}

void PairProblem::validate() const {
  massA.validate();
  massB.validate();
  ptsA.validate();
  ptsB.validate();
  if (featA.dim() != featB.dim())
    throw std::invalid_argument("feature dimension mismatch between sides");
  if (featA.rows() != ptsA.size() || featA.rows() != massA.size())
    throw std::invalid_argument("source-side size mismatch");
  if (featB.rows() != ptsB.size() || featB.rows() != massB.size())
    throw std::invalid_argument("target-side size mismatch");
}

CostMatrix semantic_cost(const FeatureMatrix& a, const FeatureMatrix& b) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("semantic_cost: feature dimension mismatch");
  const FeatureMatrix na = a.row_normalized();
  const FeatureMatrix nb = b.row_normalized();
  Mat c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ra = na.data().row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double v = 1.0 - kern::dot(ra, nb.data().row(j), a.dim());
      if (v < 0.0) v = 0.0;  // unit rows can overshoot cos by an ulp
      if (v > 2.0) v = 2.0;
      c(i, j) = v;
    }
  }
  return CostMatrix{std::move(c), CostKind::semantic};
}

DistanceMatrix pairwise_distances(const PointSet3D& pts) {
  pts.validate();
  const std::size_t n = pts.size();
  Mat d(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = i + 1; k < n; ++k) {
      const double v = dist3(pts.pts[i], pts.pts[k]);
      d(i, k) = v;
      d(k, i) = v;  // mirrored, symmetric by construction
    }
  return DistanceMatrix{std::move(d)};
}

CostMatrix minmax_normalize(const CostMatrix& c) {
  if (c.m.empty()) throw std::invalid_argument("minmax_normalize: empty matrix");
  double lo, hi;
  kern::reduce_minmax(c.m.data(), c.m.size(), &lo, &hi);
  Mat out(c.rows(), c.cols());
  if (hi == lo) return CostMatrix{std::move(out), c.kind};  // no ranking info
  kern::sub_div(c.m.data(), lo, hi - lo, out.data(), out.size());
  return CostMatrix{std::move(out), c.kind};
}

}  // namespace fgw
