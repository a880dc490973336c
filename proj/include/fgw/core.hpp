#pragma once
// Domain types shared by all solvers: measures, features, 3D points, cost
// and distance matrices, transport plans. All types are immutable after
// construction and safe to share across threads; the operations are pure.

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "fgw/mat.hpp"

namespace fgw {

using Vec3 = std::array<double, 3>;

double dist3(const Vec3& a, const Vec3& b);

// Nonnegative mass vector on a finite point set.
struct DiscreteMeasure {
  std::vector<double> mass;

  static DiscreteMeasure uniform(std::size_t n);
  std::size_t size() const { return mass.size(); }
  double total() const;
  void validate() const;  // finite, nonnegative
  bool is_probability(double tol = 1e-9) const;
};

// n x d embedding matrix; rows must be finite.
class FeatureMatrix {
 public:
  explicit FeatureMatrix(Mat data);
  const Mat& data() const { return m_; }
  std::size_t rows() const { return m_.rows(); }
  std::size_t dim() const { return m_.cols(); }
  // per-row unit-norm copy; zero-norm rows are a hard input error
  FeatureMatrix row_normalized() const;

 private:
  Mat m_;
};

struct PointSet3D {
  std::vector<Vec3> pts;

  std::size_t size() const { return pts.size(); }
  void validate() const;  // all coordinates finite
};

enum class CostKind { semantic, geometric, fused };
const char* cost_kind_name(CostKind k);

struct CostMatrix {
  Mat m;
  CostKind kind = CostKind::semantic;

  std::size_t rows() const { return m.rows(); }
  std::size_t cols() const { return m.cols(); }
};

// Symmetric Euclidean distances, zero diagonal.
struct DistanceMatrix {
  Mat m;

  std::size_t size() const { return m.rows(); }
  double operator()(std::size_t i, std::size_t k) const { return m(i, k); }
};

struct PlanMeta {
  std::string solver = "none";
  int iteration = 0;  // pipeline stage index t
  double objective = 0.0;
  bool gradient_detached = false;
};

struct TransportPlan {
  Mat m;
  PlanMeta meta;

  std::size_t rows() const { return m.rows(); }
  std::size_t cols() const { return m.cols(); }
};

// One matching instance: two feature sets, two 3D point sets, two masses.
struct PairProblem {
  FeatureMatrix featA;
  FeatureMatrix featB;
  PointSet3D ptsA;
  PointSet3D ptsB;
  DiscreteMeasure massA;
  DiscreteMeasure massB;

  std::size_t n() const { return featA.rows(); }
  std::size_t m() const { return featB.rows(); }
  void validate() const;  // dimension agreement, shared feature dim
};

// C_ij = 1 - cos(f_i, f_j); result clamped into [0, 2] against rounding.
CostMatrix semantic_cost(const FeatureMatrix& a, const FeatureMatrix& b);

// Exact-symmetric Euclidean distance matrix with zero diagonal.
DistanceMatrix pairwise_distances(const PointSet3D& pts);

// (c - min) / (max - min); a constant matrix maps to all-zeros.
CostMatrix minmax_normalize(const CostMatrix& c);

}  // namespace fgw
