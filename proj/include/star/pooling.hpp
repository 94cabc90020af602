#pragma once

#include "star/types.hpp"

namespace star {

// Non-overlapping average pooling of a P x P token grid down to P' x P'.
// Every output token is the channelwise mean of its (P/P')^2 input block.
template <typename Scalar>
BasicFrameFeature<Scalar> average_pool(const BasicFrameFeature<Scalar>& feature, int target_grid) {
  const int grid = feature.grid_size;
  if (target_grid <= 0 || grid % target_grid != 0) {
    throw Error("pooling not exact: target grid " + std::to_string(target_grid) +
                " does not divide " + std::to_string(grid));
  }
  if (target_grid == grid) return feature;

  const int block = grid / target_grid;
  const Scalar inv = Scalar(1) / static_cast<Scalar>(block * block);
  TokenMatrix<Scalar> out = TokenMatrix<Scalar>::Zero(static_cast<Eigen::Index>(target_grid) * target_grid,
                                                      feature.dim());
  for (int y = 0; y < grid; ++y) {
    for (int x = 0; x < grid; ++x) {
      out.row((y / block) * target_grid + x / block) += feature.tokens.row(y * grid + x);
    }
  }
  out *= inv;
  return BasicFrameFeature<Scalar>(target_grid, std::move(out));
}

// Pooled grid flattened to the P'*P'*D vector used by clustering and retrieval.
template <typename Scalar>
RowVector<Scalar> pool_flat(const BasicFrameFeature<Scalar>& feature, int target_grid) {
  return average_pool(feature, target_grid).flat();
}

}  // namespace star
