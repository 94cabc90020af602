#include "star/star_memory.hpp"

#include "star/pooling.hpp"

namespace star {

namespace {

std::int64_t grid_tokens(int p) { return static_cast<std::int64_t>(p) * p; }

}  // namespace

StarMemory::StarMemory(const MemoryConfig& cfg)
    : config(cfg),
      buffer(cfg.n_buff, cfg.p_spa, cfg.p_tem),
      abstract(TokenMatrixd::Zero(static_cast<Eigen::Index>(cfg.n_abs) * grid_tokens(cfg.p_abs), cfg.dim)) {}

std::array<std::int64_t, 4> StarMemory::bank_tokens() const {
  const auto spa = static_cast<std::int64_t>(spatial().size()) * grid_tokens(config.p_spa);
  const auto tem = static_cast<std::int64_t>(temporal.size()) * grid_tokens(config.p_tem);
  const auto abs = static_cast<std::int64_t>(abstract.rows());
  const auto ret = static_cast<std::int64_t>(retrieved.size()) * grid_tokens(config.p_spa);
  return {spa, tem, abs, ret};
}

std::int64_t StarMemory::token_count() const {
  const auto b = bank_tokens();
  return b[0] + b[1] + b[2] + b[3];
}

std::uint64_t clustering_seed(std::uint64_t base, std::uint64_t frames_before) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (frames_before + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void check_frame(const FrameFeature& raw, const MemoryConfig& config) {
  if (raw.dim() != config.dim) {
    throw Error("frame dim " + std::to_string(raw.dim()) + " does not match config dim " +
                std::to_string(config.dim));
  }
  for (int p : {config.p_spa, config.p_tem, config.p_abs}) {
    if (raw.grid_size % p != 0) {
      throw Error("pooling not exact: " + std::to_string(p) + " does not divide frame grid " +
                  std::to_string(raw.grid_size));
    }
  }
  if (!raw.all_finite()) throw Error("frame contains non-finite values");
}

void buffer_push(StarMemory& memory, FrameFeature pooled_spa) {
  memory.buffer.push(std::move(pooled_spa), memory.frames_ingested + 1);
}

void abstract_update(StarMemory& memory, const FrameFeature& pooled_abs, const AttentionParams<double>& params) {
  if (pooled_abs.grid_size != memory.config.p_abs) throw Error("abstract_update: feature not pooled to p_abs");
  memory.abstract = semantic_attention(memory.abstract, pooled_abs.tokens, params).output;
}

void write_frame(StarMemory& memory, const FrameFeature& raw, const AttentionParams<double>& params) {
  const auto& cfg = memory.config;
  check_frame(raw, cfg);
  if (params.dim() != cfg.dim) throw Error("attention params dim does not match config dim");

  buffer_push(memory, average_pool(raw, cfg.p_spa));
  temporal_update(memory.temporal, pool_flat(raw, cfg.p_tem), cfg, clustering_seed(cfg.rng_seed, memory.frames_ingested));
  abstract_update(memory, average_pool(raw, cfg.p_abs), params);

  memory.retrieved_keys = retrieve_key_features(memory.buffer, memory.temporal.centroids, memory.temporal.weights,
                                                cfg.n_ret, &BufferEntry::pooled_tem);
  memory.retrieved.clear();
  for (const auto& key : memory.retrieved_keys) memory.retrieved.push_back(memory.buffer[key.buffer_index].feature);
  ++memory.frames_ingested;
}

}  // namespace star
