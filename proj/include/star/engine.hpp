#pragma once

#include "star/attention.hpp"
#include "star/snapshot.hpp"
#include "star/star_memory.hpp"

#include <memory>
#include <string>
#include <vector>

namespace star {

struct QueryResult {
  std::string question_id;
  std::shared_ptr<const MemorySnapshot> snapshot;
  // Set when no retained snapshot is old enough; `snapshot` is then the current one.
  bool stale = false;
};

// Streaming memory engine: one writer thread calls ingest_frame, any number
// of reader threads call read_snapshot / query_at concurrently.
//
// Each commit builds a fresh immutable snapshot and publishes it, together
// with the bounded history ring, by swapping a single shared pointer. Readers
// only ever copy that pointer, so they see version v or v+1 in full and never
// a bank that is still being written.
class Engine {
 public:
  // Attention projections are drawn from config.rng_seed.
  Engine(const MemoryConfig& config, int input_grid);
  Engine(const MemoryConfig& config, int input_grid, AttentionParams<double> params);

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  // Writer only. Returns the committed version. A rejected frame leaves both
  // the banks and the published snapshot untouched.
  std::uint64_t ingest_frame(const FrameFeature& raw);

  std::shared_ptr<const MemorySnapshot> read_snapshot() const;

  // Newest retained snapshot with timestamp_frame <= frame_timestamp.
  QueryResult query_at(std::string question_id, std::uint64_t frame_timestamp) const;

  const MemoryConfig& config() const { return config_; }
  int input_grid() const { return input_grid_; }
  const AttentionParams<double>& params() const { return params_; }

  // Writer-side views; not safe to call concurrently with ingest_frame.
  const StarMemory& memory() const { return memory_; }
  // Bank tokens + buffer tokens + tokens held by the history ring.
  std::int64_t state_tokens() const;

 private:
  struct Published {
    std::shared_ptr<const MemorySnapshot> current;
    std::vector<std::shared_ptr<const MemorySnapshot>> history;  // oldest first
  };

  std::shared_ptr<const Published> load() const;
  void publish(std::shared_ptr<const Published> next);

  MemoryConfig config_;
  int input_grid_;
  AttentionParams<double> params_;
  StarMemory memory_;
  std::shared_ptr<const Published> published_;
};

}  // namespace star
