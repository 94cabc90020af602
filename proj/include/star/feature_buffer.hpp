#pragma once

#include "star/types.hpp"

#include <cstddef>
#include <deque>
#include <memory>
#include <vector>

namespace star {

struct BufferEntry {
  std::shared_ptr<const FrameFeature> feature;  // pooled to p_spa
  RowVectord pooled_tem;                         // feature pooled to p_tem, flattened
  std::uint64_t frame_index = 0;                 // 1-based ingest position
};

// Sliding window over the newest pooled frames, newest first. Spatial memory
// is the prefix of length n_spa.
class FeatureBuffer {
 public:
  FeatureBuffer(int capacity, int spa_grid, int tem_grid);

  // `feature` must already be pooled to the spatial grid.
  void push(FrameFeature feature, std::uint64_t frame_index);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  int capacity() const { return capacity_; }
  const BufferEntry& operator[](std::size_t i) const { return entries_[i]; }
  const BufferEntry& newest() const { return entries_.front(); }

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  std::vector<std::shared_ptr<const FrameFeature>> spatial(int n_spa) const;

  std::int64_t token_count() const;

 private:
  int capacity_;
  int spa_grid_;
  int tem_grid_;
  std::deque<BufferEntry> entries_;
};

}  // namespace star
