#include "star/feature_buffer.hpp"

#include "star/pooling.hpp"

#include <algorithm>

namespace star {

FeatureBuffer::FeatureBuffer(int capacity, int spa_grid, int tem_grid)
    : capacity_(capacity), spa_grid_(spa_grid), tem_grid_(tem_grid) {
  if (capacity <= 0) throw Error("feature buffer capacity must be positive");
  if (tem_grid <= 0 || spa_grid % tem_grid != 0) throw Error("pooling not exact: p_tem must divide p_spa");
}

void FeatureBuffer::push(FrameFeature feature, std::uint64_t frame_index) {
  if (feature.grid_size != spa_grid_) {
    throw Error("buffer expects grid " + std::to_string(spa_grid_) + ", got " +
                std::to_string(feature.grid_size));
  }
  BufferEntry entry;
  entry.pooled_tem = pool_flat(feature, tem_grid_);
  entry.feature = std::make_shared<const FrameFeature>(std::move(feature));
  entry.frame_index = frame_index;
  entries_.push_front(std::move(entry));
  while (entries_.size() > static_cast<std::size_t>(capacity_)) entries_.pop_back();
}

std::vector<std::shared_ptr<const FrameFeature>> FeatureBuffer::spatial(int n_spa) const {
  const auto n = std::min(entries_.size(), static_cast<std::size_t>(std::max(n_spa, 0)));
  std::vector<std::shared_ptr<const FrameFeature>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(entries_[i].feature);
  return out;
}

std::int64_t FeatureBuffer::token_count() const {
  return static_cast<std::int64_t>(entries_.size()) * spa_grid_ * spa_grid_;
}

}  // namespace star
