#pragma once

#include "star/pooling.hpp"
#include "star/types.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <ranges>
#include <span>
#include <vector>

namespace star {

struct KeyFrame {
  int cluster = 0;            // index into the temporal bank
  std::size_t buffer_index = 0;  // index into the buffer, 0 = newest
  double distance = 0.0;      // squared distance at p_tem resolution
};

// Indices of the `count` heaviest clusters, heaviest first. Equal weights
// keep the lower cluster index first.
template <typename WeightsDerived>
std::vector<int> top_weight_clusters(const Eigen::MatrixBase<WeightsDerived>& weights, int count) {
  std::vector<int> order(static_cast<std::size_t>(weights.size()));
  std::iota(order.begin(), order.end(), 0);
  const auto take = std::min<std::size_t>(order.size(), static_cast<std::size_t>(std::max(count, 0)));
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return weights(a) > weights(b); });
  order.resize(take);
  return order;
}

// For each of the n_ret heaviest centroids, the buffer entry whose p_tem
// pooling is nearest to it. `project` maps a buffer element to its flattened
// p_tem representation. Distance ties go to the lower buffer index (newer frame).
template <std::ranges::random_access_range Buffer, typename BankDerived, typename WeightsDerived,
          typename Project = std::identity>
std::vector<KeyFrame> retrieve_key_features(const Buffer& buffer, const Eigen::MatrixBase<BankDerived>& bank,
                                            const Eigen::MatrixBase<WeightsDerived>& weights, int n_ret,
                                            Project project = {}) {
  const auto buffer_size = static_cast<std::size_t>(std::ranges::size(buffer));
  if (buffer_size == 0) throw Error("retrieve_key_features: buffer is empty (warm-up)");
  if (bank.rows() == 0) throw Error("retrieve_key_features: temporal bank is empty (warm-up)");
  if (weights.size() != bank.rows()) throw Error("retrieve_key_features: weight count differs from bank size");

  std::vector<KeyFrame> out;
  for (int cluster : top_weight_clusters(weights, n_ret)) {
    KeyFrame best{cluster, 0, std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < buffer_size; ++i) {
      const auto& pooled = std::invoke(project, std::ranges::begin(buffer)[i]);
      if (pooled.size() != bank.cols()) throw Error("retrieve_key_features: buffer entry size differs from bank");
      const double d = (pooled - bank.row(cluster)).squaredNorm();
      if (d < best.distance) {
        best.distance = d;
        best.buffer_index = i;
      }
    }
    out.push_back(best);
  }
  return out;
}

// Convenience form over p_spa frames: pools each to p_tem before comparing.
template <typename BankDerived, typename WeightsDerived>
std::vector<KeyFrame> retrieve_key_features(std::span<const FrameFeature> buffer,
                                            const Eigen::MatrixBase<BankDerived>& bank,
                                            const Eigen::MatrixBase<WeightsDerived>& weights,
                                            const MemoryConfig& config) {
  std::vector<RowVectord> pooled;
  pooled.reserve(buffer.size());
  for (const auto& f : buffer) pooled.push_back(pool_flat(f, config.p_tem));
  return retrieve_key_features(pooled, bank, weights, config.n_ret);
}

}  // namespace star
