#pragma once

#include "star/attention.hpp"
#include "star/feature_buffer.hpp"
#include "star/kmeans.hpp"
#include "star/retrieval.hpp"
#include "star/types.hpp"

#include <array>
#include <memory>
#include <vector>

namespace star {

// The four memory banks plus the feature buffer. Owned by the single writer.
struct StarMemory {
  MemoryConfig config;
  FeatureBuffer buffer;
  TemporalBank temporal;
  TokenMatrixd abstract;  // n_abs * p_abs^2 tokens, zero-initialized
  std::vector<std::shared_ptr<const FrameFeature>> retrieved;
  std::vector<KeyFrame> retrieved_keys;
  std::uint64_t frames_ingested = 0;

  explicit StarMemory(const MemoryConfig& cfg);

  std::vector<std::shared_ptr<const FrameFeature>> spatial() const { return buffer.spatial(config.n_spa); }

  // Token counts of the S, T, A, R banks.
  std::array<std::int64_t, 4> bank_tokens() const;
  std::int64_t token_count() const;
};

// Seed of the clustering call made while ingesting frame `frames_before + 1`.
std::uint64_t clustering_seed(std::uint64_t base, std::uint64_t frames_before);

// Rejects frames the write path cannot take without partial mutation.
void check_frame(const FrameFeature& raw, const MemoryConfig& config);

// Buffer push of an already p_spa-pooled frame.
void buffer_push(StarMemory& memory, FrameFeature pooled_spa);

// Abstract update with the p_abs pooled frame; its p_abs^2 tokens are the new features.
void abstract_update(StarMemory& memory, const FrameFeature& pooled_abs, const AttentionParams<double>& params);

// Full write path for one raw frame: buffer, spatial, temporal, abstract and
// retrieved updates in that order.
void write_frame(StarMemory& memory, const FrameFeature& raw, const AttentionParams<double>& params);

}  // namespace star
