#pragma once

#include "star/types.hpp"

#include <Eigen/Eigenvalues>

#include <array>
#include <cmath>

namespace star {

template <typename Scalar>
struct PcaProjection {
  TokenMatrix<Scalar> coords;                              // N x 2
  Eigen::Matrix<Scalar, Eigen::Dynamic, 2> components;     // D x 2, unit columns
  RowVector<Scalar> mean;
  std::array<Scalar, 2> variances{};
  // Set when fewer than two directions carry variance.
  bool degenerate = false;
};

// Projects the rows of `points` onto the top two principal directions of
// their covariance. Components are sign-normalised so their largest-magnitude
// entry is positive.
template <typename Derived>
PcaProjection<typename Derived::Scalar> pca_top2(const Eigen::MatrixBase<Derived>& points,
                                                 typename Derived::Scalar rel_tol = 1e-9) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (points.rows() < 3) throw Error("pca: need at least 3 points");
  const auto n = points.rows();
  const auto d = points.cols();

  PcaProjection<Scalar> out;
  out.mean = points.colwise().mean();
  const Mat centered = points.rowwise() - out.mean;
  const Mat cov = (centered.transpose() * centered) / static_cast<Scalar>(n);

  Eigen::SelfAdjointEigenSolver<Mat> solver(cov);
  if (solver.info() != Eigen::Success) throw Error("pca: eigen-decomposition failed");
  const auto& values = solver.eigenvalues();  // ascending
  const auto& vectors = solver.eigenvectors();

  out.components.setZero(d, 2);
  for (int c = 0; c < 2 && c < d; ++c) {
    out.components.col(c) = vectors.col(d - 1 - c);
    out.variances[c] = std::max(Scalar(0), values(d - 1 - c));
    Eigen::Index peak = 0;
    out.components.col(c).cwiseAbs().maxCoeff(&peak);
    if (out.components(peak, c) < Scalar(0)) out.components.col(c) *= Scalar(-1);
  }

  const Scalar scale = std::max(cov.trace(), (out.mean.squaredNorm() + Scalar(1)) * std::numeric_limits<Scalar>::epsilon());
  out.degenerate = d < 2 || out.variances[0] <= rel_tol * scale || out.variances[1] <= rel_tol * scale;
  out.coords = centered * out.components;
  return out;
}

}  // namespace star
