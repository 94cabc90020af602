#include "star/engine.hpp"
#include "star/stream_io.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <thread>

namespace star {
namespace {

MemoryConfig small_config() {
  MemoryConfig c;
  c.dim = 8;
  return c;
}

TEST(Engine, FirstFrameBankSizes) {
  std::mt19937_64 rng(1);
  Engine eng(small_config(), 16);
  EXPECT_EQ(eng.ingest_frame(testing::random_frame(rng, 16, 8)), 1u);
  const auto s = eng.read_snapshot();
  EXPECT_EQ(s->range(Bank::kSpatial).length, 64u);
  EXPECT_EQ(s->range(Bank::kTemporal).length, 16u);
  EXPECT_EQ(s->range(Bank::kAbstract).length, 25u);
  EXPECT_EQ(s->range(Bank::kRetrieved).length, 64u);
  EXPECT_EQ(s->token_count(), 169u);
  EXPECT_TRUE(s->verify());
}

TEST(Engine, SteadyStateHitsBudget) {
  std::mt19937_64 rng(2);
  const auto c = small_config();
  Engine eng(c, 16);
  for (int t = 1; t <= 60; ++t) {
    eng.ingest_frame(testing::random_frame(rng, 16, 8));
    const auto s = eng.read_snapshot();
    ASSERT_LE(static_cast<std::int64_t>(s->token_count()), max_tokens(c));
    if (t >= c.n_tem + 1) ASSERT_EQ(static_cast<std::int64_t>(s->token_count()), max_tokens(c)) << "t=" << t;
    ASSERT_EQ(s->timestamp_frame, static_cast<std::uint64_t>(t));
    ASSERT_DOUBLE_EQ(eng.memory().temporal.total_weight(), t);
  }
}

TEST(Engine, SnapshotLayoutFollowsBanks) {
  std::mt19937_64 rng(3);
  Engine eng(small_config(), 16);
  for (int t = 0; t < 30; ++t) eng.ingest_frame(testing::random_frame(rng, 16, 8));
  const auto s = eng.read_snapshot();
  const auto& m = eng.memory();
  EXPECT_EQ(TokenMatrixd(s->bank(Bank::kSpatial)), m.spatial()[0]->tokens);
  EXPECT_EQ(TokenMatrixd(s->bank(Bank::kAbstract)), m.abstract);
  const auto tem = s->bank(Bank::kTemporal);
  EXPECT_EQ(tem.row(0), m.temporal.centroids.row(0).head(8));
  EXPECT_EQ(TokenMatrixd(s->bank(Bank::kRetrieved).topRows(64)), m.retrieved[0]->tokens);
}

TEST(Engine, SameFrameTwiceKeepsSizeAndBumpsVersion) {
  std::mt19937_64 rng(4);
  Engine eng(small_config(), 16);
  const auto f = testing::random_frame(rng, 16, 8);
  for (int t = 0; t < 30; ++t) eng.ingest_frame(testing::random_frame(rng, 16, 8));
  const auto before = eng.read_snapshot();
  eng.ingest_frame(f);
  eng.ingest_frame(f);
  const auto after = eng.read_snapshot();
  EXPECT_EQ(after->version, before->version + 2);
  EXPECT_EQ(after->token_count(), before->token_count());
  for (int b = 0; b < 4; ++b) EXPECT_EQ(after->banks[b].length, before->banks[b].length);
}

TEST(Engine, EmptyBeforeFirstFrame) {
  Engine eng(small_config(), 16);
  const auto a = eng.read_snapshot();
  const auto b = eng.read_snapshot();
  EXPECT_EQ(a->version, 0u);
  EXPECT_EQ(a->token_count(), 0u);
  EXPECT_EQ(a, b);
  EXPECT_TRUE(a->verify());
}

TEST(Engine, RepeatedReadsAgree) {
  std::mt19937_64 rng(5);
  Engine eng(small_config(), 16);
  for (int t = 0; t < 10; ++t) eng.ingest_frame(testing::random_frame(rng, 16, 8));
  const auto a = eng.read_snapshot();
  const auto b = eng.read_snapshot();
  EXPECT_EQ(a->version, b->version);
  EXPECT_EQ(a->checksum, b->checksum);
  EXPECT_EQ(a->tokens, b->tokens);
}

TEST(Engine, QueryAtPicksNewestNotAfterTimestamp) {
  std::mt19937_64 rng(6);
  auto c = small_config();
  c.history_depth = 4;
  Engine eng(c, 16);
  const auto early = eng.query_at("q0", 0);
  EXPECT_TRUE(early.stale);
  for (int t = 0; t < 10; ++t) eng.ingest_frame(testing::random_frame(rng, 16, 8));

  const auto now = eng.query_at("q1", 10);
  EXPECT_FALSE(now.stale);
  EXPECT_EQ(now.question_id, "q1");
  EXPECT_EQ(now.snapshot->timestamp_frame, 10u);
  EXPECT_EQ(eng.query_at("q2", 99).snapshot->timestamp_frame, 10u);

  const auto mid = eng.query_at("q3", 8);
  EXPECT_FALSE(mid.stale);
  EXPECT_EQ(mid.snapshot->timestamp_frame, 8u);

  // Frames 7..10 are retained; 6 has aged out.
  const auto old = eng.query_at("q4", 6);
  EXPECT_TRUE(old.stale);
  EXPECT_EQ(old.snapshot->version, 10u);
}

TEST(Engine, RejectedFrameLeavesStateIntact) {
  std::mt19937_64 rng(7);
  Engine eng(small_config(), 16);
  for (int t = 0; t < 5; ++t) eng.ingest_frame(testing::random_frame(rng, 16, 8));
  const auto before = eng.read_snapshot();
  const auto weight = eng.memory().temporal.total_weight();

  EXPECT_THROW(eng.ingest_frame(testing::random_frame(rng, 8, 8)), Error);
  EXPECT_THROW(eng.ingest_frame(testing::random_frame(rng, 16, 4)), Error);
  auto bad = testing::random_frame(rng, 16, 8);
  bad.tokens(3, 2) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(eng.ingest_frame(bad), Error);

  EXPECT_EQ(eng.read_snapshot(), before);
  EXPECT_EQ(eng.memory().temporal.total_weight(), weight);
  EXPECT_EQ(eng.memory().frames_ingested, 5u);
  EXPECT_EQ(eng.memory().buffer.size(), 5u);
}

TEST(Engine, RejectsInvalidConfig) {
  MemoryConfig c = small_config();
  EXPECT_THROW(Engine(c, 12), Error);
  c.decay_alpha = 0.0;
  EXPECT_THROW(Engine(c, 16), Error);
  EXPECT_THROW(Engine(small_config(), 16, AttentionParams<double>::seeded(4, 0.1, 1)), Error);
}

TEST(Engine, StateTokensStayBoundedAfterBufferFills) {
  std::mt19937_64 rng(8);
  auto c = small_config();
  c.n_buff = 20;
  Engine eng(c, 16);
  std::int64_t steady = -1;
  for (int t = 1; t <= 80; ++t) {
    eng.ingest_frame(testing::random_frame(rng, 16, 8));
    if (t == 40) steady = eng.state_tokens();
    if (t > 40) ASSERT_EQ(eng.state_tokens(), steady);
  }
}

TEST(Engine, ConcurrentReadersSeeMonotonicVersions) {
  auto c = small_config();
  SynthOptions so;
  so.dim = 8;
  so.n_frames = 400;
  const auto frames = synth_frames(so);
  Engine eng(c, 16);
  std::atomic<bool> done{false};
  std::atomic<int> bad{0};
  std::vector<std::jthread> readers;
  for (int r = 0; r < 3; ++r) {
    readers.emplace_back([&] {
      std::uint64_t last = 0;
      while (!done.load(std::memory_order_acquire)) {
        const auto s = eng.read_snapshot();
        if (s->version < last || !s->verify()) bad.fetch_add(1);
        last = s->version;
        const auto q = eng.query_at("q", s->timestamp_frame);
        if (!q.stale && q.snapshot->timestamp_frame > s->timestamp_frame) bad.fetch_add(1);
      }
    });
  }
  for (const auto& f : frames) eng.ingest_frame(f);
  done.store(true, std::memory_order_release);
  readers.clear();
  EXPECT_EQ(bad.load(), 0);
  EXPECT_EQ(eng.read_snapshot()->version, 400u);
}

TEST(Snapshot, VerifyDetectsTampering) {
  std::mt19937_64 rng(9);
  Engine eng(small_config(), 16);
  eng.ingest_frame(testing::random_frame(rng, 16, 8));
  MemorySnapshot copy = *eng.read_snapshot();
  EXPECT_TRUE(copy.verify());
  copy.tokens(5, 1) += 1e-9;
  EXPECT_FALSE(copy.verify());
  copy = *eng.read_snapshot();
  copy.banks[1].start += 1;
  EXPECT_FALSE(copy.verify());
}

}  // namespace
}  // namespace star
