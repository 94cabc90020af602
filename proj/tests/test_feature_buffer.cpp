#include "star/feature_buffer.hpp"
#include "star/pooling.hpp"
#include "star/star_memory.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <list>

namespace star {
namespace {

FrameFeature tagged(double tag) { return FrameFeature(2, TokenMatrixd::Constant(4, 3, tag)); }

double tag_of(const FrameFeature& f) { return f.tokens(0, 0); }

TEST(FeatureBuffer, EvictsOldestFirst) {
  FeatureBuffer buf(3, 2, 1);
  for (int i = 1; i <= 4; ++i) buf.push(tagged(i), i);
  ASSERT_EQ(buf.size(), 3u);
  EXPECT_EQ(tag_of(*buf[0].feature), 4);
  EXPECT_EQ(tag_of(*buf[1].feature), 3);
  EXPECT_EQ(tag_of(*buf[2].feature), 2);
  EXPECT_EQ(buf[0].frame_index, 4u);
}

TEST(FeatureBuffer, SpatialIsNewestPrefix) {
  FeatureBuffer buf(5, 2, 1);
  for (int i = 1; i <= 7; ++i) {
    buf.push(tagged(i), i);
    const auto spa = buf.spatial(1);
    ASSERT_EQ(spa.size(), 1u);
    EXPECT_EQ(tag_of(*spa[0]), i);
  }
  EXPECT_EQ(buf.spatial(3).size(), 3u);
  EXPECT_EQ(buf.spatial(10).size(), 5u);
}

TEST(FeatureBuffer, MatchesPlainListReplay) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> cap(1, 12);
  for (int trial = 0; trial < 50; ++trial) {
    const int capacity = cap(rng);
    FeatureBuffer buf(capacity, 2, 1);
    std::list<double> oracle;
    for (int t = 1; t <= 30; ++t) {
      buf.push(tagged(t * 1.5), t);
      oracle.push_front(t * 1.5);
      if (static_cast<int>(oracle.size()) > capacity) oracle.pop_back();
      ASSERT_EQ(buf.size(), oracle.size());
      ASSERT_EQ(buf.size(), static_cast<std::size_t>(std::min(t, capacity)));
      std::size_t i = 0;
      for (double want : oracle) EXPECT_EQ(tag_of(*buf[i++].feature), want);
    }
  }
}

TEST(FeatureBuffer, CachesTemporalPooling) {
  std::mt19937_64 rng(4);
  FeatureBuffer buf(2, 4, 2);
  const auto f = testing::random_frame(rng, 4, 3);
  buf.push(f, 1);
  EXPECT_EQ(buf[0].pooled_tem, pool_flat(f, 2));
}

TEST(FeatureBuffer, RejectsGridMismatch) {
  FeatureBuffer buf(3, 2, 1);
  EXPECT_THROW(buf.push(FrameFeature::zeros(4, 3), 1), Error);
  EXPECT_TRUE(buf.empty());
}

TEST(BufferPush, UsesIngestCounter) {
  MemoryConfig c;
  c.p_spa = 2;
  c.p_tem = 1;
  c.p_abs = 1;
  c.dim = 3;
  c.n_buff = 3;
  StarMemory m(c);
  buffer_push(m, tagged(9));
  EXPECT_EQ(m.buffer.size(), 1u);
  EXPECT_EQ(m.buffer[0].frame_index, 1u);
  EXPECT_EQ(m.spatial().size(), 1u);
}

}  // namespace
}  // namespace star
