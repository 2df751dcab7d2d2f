#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>

namespace hklapse {

/// Largest Euclidean distance between a column of `a` and a column of `b`.
/// Blocked Gram-matrix evaluation so large clouds stay cache- and
/// BLAS-friendly; exact up to floating-point rounding.
template <typename DerivedA, typename DerivedB>
double max_cross_distance(const Eigen::MatrixBase<DerivedA>& a,
                          const Eigen::MatrixBase<DerivedB>& b) {
  const Eigen::Index pa = a.cols(), pb = b.cols();
  if (pa == 0 || pb == 0) return 0.0;
  constexpr Eigen::Index kBlock = 256;
  const Eigen::RowVectorXd na = a.colwise().squaredNorm();
  const Eigen::RowVectorXd nb = b.colwise().squaredNorm();
  double best = 0.0;
  for (Eigen::Index i = 0; i < pa; i += kBlock) {
    const Eigen::Index wi = std::min(kBlock, pa - i);
    for (Eigen::Index j = 0; j < pb; j += kBlock) {
      const Eigen::Index wj = std::min(kBlock, pb - j);
      Eigen::MatrixXd d2 = -2.0 * (a.middleCols(i, wi).transpose() * b.middleCols(j, wj));
      d2.colwise() += na.segment(i, wi).transpose();
      d2.rowwise() += nb.segment(j, wj);
      best = std::max(best, d2.maxCoeff());
    }
  }
  return std::sqrt(std::max(0.0, best));
}

/// Diameter of a point cloud given column-wise.
template <typename Derived>
double max_pairwise_distance(const Eigen::MatrixBase<Derived>& pts) {
  const Eigen::Index p = pts.cols();
  if (p < 2) return 0.0;
  if (p <= 64) {  // direct loop beats the blocked path for tiny clouds
    double best = 0.0;
    for (Eigen::Index i = 0; i + 1 < p; ++i)
      for (Eigen::Index j = i + 1; j < p; ++j)
        best = std::max(best, (pts.col(i) - pts.col(j)).squaredNorm());
    return std::sqrt(best);
  }
  return max_cross_distance(pts, pts);
}

}  // namespace hklapse
