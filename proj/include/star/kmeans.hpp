#pragma once

#include "star/types.hpp"

#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace star {

template <typename Scalar>
using DenseMatrix = TokenMatrix<Scalar>;  // row-major: one point per row

// Result of weighted Lloyd iteration. Rows of `centroids` are flattened grids.
template <typename Scalar>
struct ClusterState {
  DenseMatrix<Scalar> centroids;
  Vector<Scalar> weights;
  std::vector<int> assignments;
  // Weighted objective after every centroid update.
  std::vector<Scalar> objective_history;
  int iterations = 0;
  bool converged = false;
};

// sum_i w_i * ||x_i - c_{a(i)}||^2
template <typename PointsDerived, typename WeightsDerived, typename CentroidsDerived>
typename PointsDerived::Scalar weighted_objective(const Eigen::MatrixBase<PointsDerived>& points,
                                                  const Eigen::MatrixBase<WeightsDerived>& weights,
                                                  const Eigen::MatrixBase<CentroidsDerived>& centroids,
                                                  const std::vector<int>& assignments) {
  using Scalar = typename PointsDerived::Scalar;
  Scalar total(0);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    total += weights(i) * (points.row(i) - centroids.row(assignments[i])).squaredNorm();
  }
  return total;
}

namespace detail {

// Nearest centroid by squared distance; ties go to the lowest index.
template <typename Row, typename Centroids>
int nearest_centroid(const Row& point, const Centroids& centroids) {
  using Scalar = typename Centroids::Scalar;
  int best = 0;
  Scalar best_d = std::numeric_limits<Scalar>::infinity();
  for (Eigen::Index j = 0; j < centroids.rows(); ++j) {
    const Scalar d = (point - centroids.row(j)).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(j);
    }
  }
  return best;
}

}  // namespace detail

// Weighted k-means over the rows of `points`.
//
// Warm start seeds centroid j with point j, so callers that pass the previous
// bank followed by the new frame resume from the previous clustering. Random
// start samples k distinct points with an mt19937_64 seeded by `seed`.
// Point weights stay fixed for the whole call; the returned cluster weights are
// the member-weight sums of the final assignment.
template <typename PointsDerived, typename WeightsDerived>
ClusterState<typename PointsDerived::Scalar> weighted_kmeans(const Eigen::MatrixBase<PointsDerived>& points,
                                                            const Eigen::MatrixBase<WeightsDerived>& weights,
                                                            int k, int max_iters, std::uint64_t seed,
                                                            KMeansInit init = KMeansInit::kWarmStart) {
  using Scalar = typename PointsDerived::Scalar;
  const auto n = points.rows();
  if (n == 0) throw Error("weighted_kmeans: no points");
  if (weights.size() != n) throw Error("weighted_kmeans: weight count differs from point count");
  if (k <= 0) throw Error("weighted_kmeans: k must be positive");
  if (k > n) throw Error("weighted_kmeans: k exceeds the number of points");
  if (max_iters <= 0) throw Error("weighted_kmeans: max_iters must be positive");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(weights(i) > Scalar(0))) throw Error("weighted_kmeans: weights must be positive");
  }

  ClusterState<Scalar> state;
  state.centroids.resize(k, points.cols());
  if (init == KMeansInit::kWarmStart) {
    state.centroids = points.topRows(k);
  } else {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::mt19937_64 rng(seed);
    // Partial Fisher-Yates with explicit modulo draws keeps the sample identical across platforms.
    for (int j = 0; j < k; ++j) {
      const auto span = static_cast<std::uint64_t>(n - j);
      const auto pick = j + static_cast<Eigen::Index>(rng() % span);
      std::swap(order[j], order[pick]);
      state.centroids.row(j) = points.row(order[j]);
    }
  }

  std::vector<int> current(static_cast<std::size_t>(n), -1);
  std::vector<int> previous;
  std::vector<int> members(static_cast<std::size_t>(k));

  for (int iter = 0; iter < max_iters; ++iter) {
    for (Eigen::Index i = 0; i < n; ++i) current[i] = detail::nearest_centroid(points.row(i), state.centroids);

    // Empty-cluster repair: hand the empty cluster the point that is worst
    // served by its centroid, taken from a cluster that has members to spare.
    // Equal costs prefer the lighter point, then the later one, so heavy
    // clusters keep their mass when centroids coincide.
    std::fill(members.begin(), members.end(), 0);
    for (int a : current) ++members[a];
    for (int j = 0; j < k; ++j) {
      if (members[j] != 0) continue;
      Eigen::Index worst = -1;
      Scalar worst_cost = -1;
      Scalar worst_weight = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (members[current[i]] < 2) continue;
        const Scalar cost = weights(i) * (points.row(i) - state.centroids.row(current[i])).squaredNorm();
        if (cost > worst_cost || (cost == worst_cost && weights(i) <= worst_weight)) {
          worst_cost = cost;
          worst_weight = weights(i);
          worst = i;
        }
      }
      --members[current[worst]];
      current[worst] = j;
      members[j] = 1;
    }

    if (current == previous) {
      state.converged = true;
      break;
    }

    state.centroids.setZero();
    Vector<Scalar> mass = Vector<Scalar>::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      state.centroids.row(current[i]) += weights(i) * points.row(i);
      mass(current[i]) += weights(i);
    }
    for (int j = 0; j < k; ++j) state.centroids.row(j) /= mass(j);
    state.weights = mass;

    state.objective_history.push_back(weighted_objective(points, weights, state.centroids, current));
    state.iterations = iter + 1;
    previous = current;
  }
  state.assignments = std::move(previous);
  return state;
}

// Temporal memory: centroids (rows, flattened p_tem grids) and their weights.
struct TemporalBank {
  DenseMatrix<double> centroids;
  Vector<double> weights;

  Eigen::Index size() const { return centroids.rows(); }
  double total_weight() const { return weights.sum(); }
};

// Appends `pooled_flat` with unit weight; once the bank holds more than
// n_tem entries it is condensed back to n_tem clusters.
inline void temporal_update(TemporalBank& bank, const RowVectord& pooled_flat, const MemoryConfig& config,
                            std::uint64_t seed) {
  if (bank.size() > 0 && bank.centroids.cols() != pooled_flat.size())
    throw Error("temporal_update: feature size differs from bank entries");
  const auto n = bank.size();
  DenseMatrix<double> points(n + 1, pooled_flat.size());
  Vector<double> weights(n + 1);
  if (n > 0) {
    points.topRows(n) = bank.centroids;
    weights.head(n) = bank.weights;
  }
  points.row(n) = pooled_flat;
  weights(n) = 1.0;
  if (points.rows() <= config.n_tem) {
    bank.centroids = std::move(points);
    bank.weights = std::move(weights);
    return;
  }
  auto state = weighted_kmeans(points, weights, config.n_tem, config.kmeans_max_iters, seed, config.kmeans_init);
  bank.centroids = std::move(state.centroids);
  bank.weights = std::move(state.weights);
}

}  // namespace star
