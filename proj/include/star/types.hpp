#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

namespace star {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename Scalar>
using TokenMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using TokenMatrixd = TokenMatrix<double>;
using RowVectord = RowVector<double>;

// One frame's P x P grid of D-dimensional tokens. Token (y, x) lives in row
// y * grid_size + x, so the row-major storage is exactly the P x P x D layout.
template <typename Scalar>
struct BasicFrameFeature {
  int grid_size = 0;
  TokenMatrix<Scalar> tokens;

  BasicFrameFeature() = default;
  BasicFrameFeature(int grid, TokenMatrix<Scalar> values) : grid_size(grid), tokens(std::move(values)) {
    if (grid <= 0) throw Error("frame grid size must be positive");
    if (tokens.rows() != static_cast<Eigen::Index>(grid) * grid || tokens.cols() <= 0)
      throw Error("frame token count does not match grid size");
  }

  static BasicFrameFeature zeros(int grid, int dim) {
    return BasicFrameFeature(grid, TokenMatrix<Scalar>::Zero(static_cast<Eigen::Index>(grid) * grid, dim));
  }

  static BasicFrameFeature from_flat(int grid, int dim, std::span<const Scalar> values) {
    if (grid <= 0 || dim <= 0) throw Error("frame grid size and dim must be positive");
    const auto rows = static_cast<Eigen::Index>(grid) * grid;
    if (static_cast<Eigen::Index>(values.size()) != rows * dim)
      throw Error("frame value count must equal P*P*D");
    return BasicFrameFeature(grid, Eigen::Map<const TokenMatrix<Scalar>>(values.data(), rows, dim));
  }

  int dim() const { return static_cast<int>(tokens.cols()); }
  Eigen::Index token_count() const { return tokens.rows(); }
  bool all_finite() const { return tokens.allFinite(); }

  // The P*P*D values as one row vector, the layout used for clustering distances.
  Eigen::Map<const RowVector<Scalar>> flat() const { return {tokens.data(), tokens.size()}; }

  template <typename Other>
  BasicFrameFeature<Other> cast() const {
    return BasicFrameFeature<Other>(grid_size, tokens.template cast<Other>());
  }
};

using FrameFeature = BasicFrameFeature<double>;
using FrameFeatureF = BasicFrameFeature<float>;

enum class KMeansInit { kWarmStart, kRandom };

struct MemoryConfig {
  int p_spa = 8;
  int p_tem = 4;
  int p_abs = 1;
  int n_buff = 300;
  int n_spa = 1;
  int n_tem = 25;
  int n_abs = 25;
  int n_ret = 3;
  int dim = 64;
  int kmeans_max_iters = 10;
  double decay_alpha = 0.1;
  std::uint64_t rng_seed = 0;
  KMeansInit kmeans_init = KMeansInit::kWarmStart;
  bool attention_scaling = false;
  // Number of recent snapshots retained for timestamped queries.
  int history_depth = 8;
};

struct ConfigError {
  std::string field;
  std::string message;
};

std::int64_t max_tokens(const MemoryConfig& config);

// Checks every config constraint against frames of side `input_grid`; returns
// the first violation, in declaration order of the checks.
std::optional<ConfigError> validate_config(const MemoryConfig& config, int input_grid);

// Reads a MemoryConfig from a JSON object. Absent keys keep their defaults.
MemoryConfig load_config_json(const std::string& path);
MemoryConfig parse_config_json(const std::string& text);

}  // namespace star
