#include "star/engine.hpp"

#include <atomic>
#include <cstring>

namespace star {

std::uint64_t snapshot_checksum(std::uint64_t version, std::uint64_t timestamp, const TokenMatrixd& tokens) {
  // FNV-1a style mixing over 64-bit words.
  constexpr std::uint64_t kPrime = 0x100000001B3ULL;
  std::uint64_t h = 0xCBF29CE484222325ULL;
  const auto mix = [&](std::uint64_t w) {
    h ^= w;
    h *= kPrime;
    h ^= h >> 29;
  };
  mix(version);
  mix(timestamp);
  mix(static_cast<std::uint64_t>(tokens.rows()));
  mix(static_cast<std::uint64_t>(tokens.cols()));
  const double* data = tokens.data();
  for (Eigen::Index i = 0; i < tokens.size(); ++i) {
    std::uint64_t w;
    std::memcpy(&w, data + i, sizeof(w));
    mix(w);
  }
  return h;
}

bool MemorySnapshot::verify() const {
  std::size_t cursor = 0;
  for (const auto& r : banks) {
    if (r.start != cursor) return false;
    cursor += r.length;
  }
  if (cursor != token_count()) return false;
  return checksum == snapshot_checksum(version, timestamp_frame, tokens);
}

MemorySnapshot make_snapshot(const StarMemory& memory, std::uint64_t version) {
  const auto& cfg = memory.config;
  const auto counts = memory.bank_tokens();
  MemorySnapshot snap;
  snap.version = version;
  snap.timestamp_frame = memory.frames_ingested;
  snap.tokens.resize(counts[0] + counts[1] + counts[2] + counts[3], cfg.dim);

  std::size_t cursor = 0;
  for (int b = 0; b < 4; ++b) {
    snap.banks[b] = {cursor, static_cast<std::size_t>(counts[b])};
    cursor += static_cast<std::size_t>(counts[b]);
  }

  Eigen::Index row = 0;
  for (const auto& f : memory.spatial()) {
    snap.tokens.middleRows(row, f->token_count()) = f->tokens;
    row += f->token_count();
  }
  const Eigen::Index tem_tokens = static_cast<Eigen::Index>(cfg.p_tem) * cfg.p_tem;
  for (Eigen::Index c = 0; c < memory.temporal.size(); ++c) {
    snap.tokens.middleRows(row, tem_tokens) =
        Eigen::Map<const TokenMatrixd>(memory.temporal.centroids.row(c).data(), tem_tokens, cfg.dim);
    row += tem_tokens;
  }
  snap.tokens.middleRows(row, memory.abstract.rows()) = memory.abstract;
  row += memory.abstract.rows();
  for (const auto& f : memory.retrieved) {
    snap.tokens.middleRows(row, f->token_count()) = f->tokens;
    row += f->token_count();
  }
  snap.checksum = snapshot_checksum(snap.version, snap.timestamp_frame, snap.tokens);
  return snap;
}

namespace {

MemoryConfig checked(const MemoryConfig& config, int input_grid) {
  if (auto err = validate_config(config, input_grid)) throw Error("invalid config (" + err->field + "): " + err->message);
  return config;
}

}  // namespace

Engine::Engine(const MemoryConfig& config, int input_grid)
    : Engine(config, input_grid,
             AttentionParams<double>::seeded(config.dim, config.decay_alpha, config.rng_seed, config.attention_scaling)) {}

Engine::Engine(const MemoryConfig& config, int input_grid, AttentionParams<double> params)
    : config_(checked(config, input_grid)), input_grid_(input_grid), params_(std::move(params)), memory_(config_) {
  params_.validate();
  if (params_.dim() != config_.dim) throw Error("attention params dim does not match config dim");
  // Nothing is served before the first frame, including the zeroed abstract slots.
  MemorySnapshot empty;
  empty.tokens.resize(0, config_.dim);
  empty.checksum = snapshot_checksum(0, 0, empty.tokens);
  auto initial = std::make_shared<Published>();
  initial->current = std::make_shared<const MemorySnapshot>(std::move(empty));
  publish(std::move(initial));
}

std::shared_ptr<const Engine::Published> Engine::load() const {
  return std::atomic_load_explicit(&published_, std::memory_order_acquire);
}

void Engine::publish(std::shared_ptr<const Published> next) {
  std::atomic_store_explicit(&published_, std::move(next), std::memory_order_release);
}

std::uint64_t Engine::ingest_frame(const FrameFeature& raw) {
  if (raw.grid_size != input_grid_) {
    throw Error("frame grid " + std::to_string(raw.grid_size) + " does not match engine input grid " +
                std::to_string(input_grid_));
  }
  write_frame(memory_, raw, params_);

  // Only the writer publishes, so reading our own last publication is race-free.
  const auto prev = load();
  const auto version = prev->current->version + 1;
  auto next = std::make_shared<Published>();
  next->current = std::make_shared<const MemorySnapshot>(make_snapshot(memory_, version));
  const auto depth = static_cast<std::size_t>(config_.history_depth);
  const auto keep = prev->history.size() + 1 > depth ? prev->history.size() + 1 - depth : 0;
  next->history.assign(prev->history.begin() + static_cast<std::ptrdiff_t>(keep), prev->history.end());
  next->history.push_back(next->current);
  publish(std::move(next));
  return version;
}

std::shared_ptr<const MemorySnapshot> Engine::read_snapshot() const { return load()->current; }

QueryResult Engine::query_at(std::string question_id, std::uint64_t frame_timestamp) const {
  const auto state = load();
  for (auto it = state->history.rbegin(); it != state->history.rend(); ++it) {
    if ((*it)->timestamp_frame <= frame_timestamp) return {std::move(question_id), *it, false};
  }
  return {std::move(question_id), state->current, true};
}

std::int64_t Engine::state_tokens() const {
  std::int64_t total = memory_.token_count() + memory_.buffer.token_count();
  for (const auto& s : load()->history) total += static_cast<std::int64_t>(s->token_count());
  return total;
}

}  // namespace star
