#pragma once

#include "star/types.hpp"

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>

namespace star {

template <typename Scalar>
using SquareMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Bias-free key/query projections and the decay of the abstract memory.
template <typename Scalar>
struct AttentionParams {
  SquareMatrix<Scalar> key_proj;
  SquareMatrix<Scalar> query_proj;
  Scalar decay_alpha = Scalar(0.1);
  // Divide logits by sqrt(D). Off by default: the update uses raw QK^T.
  bool scaled = false;

  int dim() const { return static_cast<int>(key_proj.rows()); }

  void validate() const {
    if (key_proj.rows() <= 0 || key_proj.rows() != key_proj.cols() || query_proj.rows() != key_proj.rows() ||
        query_proj.cols() != key_proj.cols())
      throw Error("attention params: projections must be square and of equal size");
    if (!key_proj.allFinite() || !query_proj.allFinite()) throw Error("attention params: non-finite projection");
    if (!(decay_alpha > Scalar(0) && decay_alpha < Scalar(1)))
      throw Error("attention params: decay out of range");
  }

  // Gaussian entries with standard deviation 1/sqrt(D); key matrix drawn first.
  static AttentionParams seeded(int dim, Scalar alpha, std::uint64_t seed, bool scaled = false) {
    if (dim <= 0) throw Error("attention params: dim must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(dim)));
    AttentionParams p;
    p.key_proj.resize(dim, dim);
    p.query_proj.resize(dim, dim);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) p.key_proj(r, c) = static_cast<Scalar>(normal(rng));
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) p.query_proj(r, c) = static_cast<Scalar>(normal(rng));
    p.decay_alpha = alpha;
    p.scaled = scaled;
    return p;
  }

  Scalar logit_scale() const { return scaled ? Scalar(1) / std::sqrt(static_cast<Scalar>(dim())) : Scalar(1); }
};

// Softmax along each row, with the row maximum subtracted first.
template <typename Derived>
TokenMatrix<typename Derived::Scalar> row_softmax(const Eigen::MatrixBase<Derived>& logits_expr) {
  using Scalar = typename Derived::Scalar;
  TokenMatrix<Scalar> out = logits_expr;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const Scalar peak = out.row(r).maxCoeff();
    out.row(r) = (out.row(r).array() - peak).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

template <typename Scalar>
struct AttentionResult {
  TokenMatrix<Scalar> output;   // updated abstract memory, n_abs x D
  TokenMatrix<Scalar> weights;  // softmaxed attention, n_abs x n
};

template <typename Scalar>
struct AttentionGradients {
  SquareMatrix<Scalar> key_proj;
  SquareMatrix<Scalar> query_proj;
  TokenMatrix<Scalar> abstract;
  TokenMatrix<Scalar> new_features;
};

namespace detail {

template <typename A, typename F, typename Scalar>
void check_attention_shapes(const Eigen::MatrixBase<A>& abstract, const Eigen::MatrixBase<F>& features,
                            const AttentionParams<Scalar>& params) {
  if (features.rows() == 0) throw Error("semantic_attention: no new features");
  if (abstract.rows() == 0) throw Error("semantic_attention: empty abstract memory");
  if (abstract.cols() != params.dim() || features.cols() != params.dim())
    throw Error("semantic_attention: dimension mismatch");
}

}  // namespace detail

// Abstract-memory update:
//   K = E Wk^T, Q = M Wq^T, W = softmax_rows(Q K^T), M' = (1 - alpha) M + W E.
// Each abstract slot distributes its attention over the incoming features.
template <typename AbsDerived, typename FeatDerived>
AttentionResult<typename AbsDerived::Scalar> semantic_attention(
    const Eigen::MatrixBase<AbsDerived>& abstract, const Eigen::MatrixBase<FeatDerived>& features,
    const AttentionParams<typename AbsDerived::Scalar>& params) {
  using Scalar = typename AbsDerived::Scalar;
  detail::check_attention_shapes(abstract, features, params);
  const TokenMatrix<Scalar> keys = features * params.key_proj.transpose();
  const TokenMatrix<Scalar> queries = abstract * params.query_proj.transpose();
  AttentionResult<Scalar> result;
  result.weights = row_softmax(params.logit_scale() * (queries * keys.transpose()));
  result.output = (Scalar(1) - params.decay_alpha) * abstract + result.weights * features;
  return result;
}

// Reverse-mode gradients of semantic_attention's output given the cotangent
// `upstream` (same shape as the output).
template <typename AbsDerived, typename FeatDerived, typename UpDerived>
AttentionGradients<typename AbsDerived::Scalar> semantic_attention_grad(
    const Eigen::MatrixBase<AbsDerived>& abstract, const Eigen::MatrixBase<FeatDerived>& features,
    const AttentionParams<typename AbsDerived::Scalar>& params, const Eigen::MatrixBase<UpDerived>& upstream) {
  using Scalar = typename AbsDerived::Scalar;
  detail::check_attention_shapes(abstract, features, params);
  if (upstream.rows() != abstract.rows() || upstream.cols() != abstract.cols())
    throw Error("semantic_attention_grad: cotangent shape mismatch");

  const Scalar scale = params.logit_scale();
  const TokenMatrix<Scalar> keys = features * params.key_proj.transpose();
  const TokenMatrix<Scalar> queries = abstract * params.query_proj.transpose();
  const TokenMatrix<Scalar> attn = row_softmax(scale * (queries * keys.transpose()));

  // Softmax backward, row by row: dS = P .* (dP - rowsum(dP .* P)).
  const TokenMatrix<Scalar> d_attn = upstream * features.transpose();
  TokenMatrix<Scalar> d_logits = attn.cwiseProduct(
      d_attn - (d_attn.cwiseProduct(attn).rowwise().sum()).replicate(1, attn.cols()));
  d_logits *= scale;

  const TokenMatrix<Scalar> d_queries = d_logits * keys;
  const TokenMatrix<Scalar> d_keys = d_logits.transpose() * queries;

  AttentionGradients<Scalar> g;
  g.abstract = (Scalar(1) - params.decay_alpha) * upstream + d_queries * params.query_proj;
  g.new_features = attn.transpose() * upstream + d_keys * params.key_proj;
  g.query_proj = d_queries.transpose() * abstract;
  g.key_proj = d_keys.transpose() * features;
  return g;
}

// Binary params file ("SAP1"); layout documented in the README.
void save_attention_params(std::ostream& out, const AttentionParams<double>& params);
AttentionParams<double> load_attention_params(std::istream& in);
AttentionParams<double> load_attention_params_file(const std::string& path);

}  // namespace star
