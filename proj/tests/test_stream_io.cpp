#include "star/stream_io.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <sstream>

namespace star {
namespace {

std::string header_bytes(std::uint32_t grid, std::uint32_t dim, std::uint64_t count, std::uint8_t dtype = 0) {
  std::string s = "FVS1";
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((grid >> (8 * i)) & 0xFF));
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((dim >> (8 * i)) & 0xFF));
  for (int i = 0; i < 8; ++i) s.push_back(static_cast<char>((count >> (8 * i)) & 0xFF));
  s.push_back(static_cast<char>(dtype));
  return s;
}

std::string f32_bytes(std::initializer_list<float> values) {
  std::string s;
  for (float v : values) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
  }
  return s;
}

std::uint64_t error_offset(const std::string& bytes) {
  std::istringstream in(bytes);
  try {
    read_stream(in);
  } catch (const StreamError& e) {
    return e.offset();
  }
  ADD_FAILURE() << "expected a stream error";
  return ~0ULL;
}

TEST(StreamIo, HandBuiltStreamParses) {
  std::istringstream in(header_bytes(2, 1, 2) + f32_bytes({1, 2, 3, 4, 5, 6, 7, 8}));
  const auto frames = read_stream(in);
  ASSERT_EQ(frames.size(), 2u);
  EXPECT_EQ(frames[0].grid_size, 2);
  EXPECT_EQ(frames[0].dim(), 1);
  EXPECT_EQ(frames[0].tokens(3, 0), 4.0);
  EXPECT_EQ(frames[1].tokens(0, 0), 5.0);
}

TEST(StreamIo, HeaderIsLittleEndian) {
  StreamHeader h;
  h.grid_side = 0x0102;
  h.dim = 3;
  h.frame_count = 0x0A0B;
  std::ostringstream out;
  write_header(out, h);
  EXPECT_EQ(out.str(), header_bytes(0x0102, 3, 0x0A0B));
}

TEST(StreamIo, Float32RoundTripIsExact) {
  std::mt19937_64 rng(1);
  std::vector<FrameFeature> frames;
  for (int i = 0; i < 3; ++i) frames.push_back(testing::random_frame(rng, 4, 3).cast<float>().cast<double>());
  std::stringstream ss;
  write_header(ss, {4, 3, 3, 0});
  for (const auto& f : frames) write_frame(ss, f);
  const auto back = read_stream(ss);
  ASSERT_EQ(back.size(), 3u);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(back[i].tokens, frames[i].tokens);
}

TEST(StreamIo, UnboundedStreamEndsCleanly) {
  std::istringstream in(header_bytes(1, 2, 0) + f32_bytes({1, 2, 3, 4, 5, 6}));
  EXPECT_EQ(read_stream(in).size(), 3u);
}

TEST(StreamIo, TruncatedFrameReportsOffset) {
  const auto bytes = header_bytes(2, 1, 0) + f32_bytes({1, 2, 3, 4, 5, 6});
  EXPECT_EQ(error_offset(bytes), 21u + 24u);
  // Partial float: offset counts the bytes that did arrive.
  EXPECT_EQ(error_offset(bytes.substr(0, bytes.size() - 2)), 21u + 22u);
}

TEST(StreamIo, BadMagic) {
  auto bytes = header_bytes(2, 1, 0);
  bytes[3] = '2';
  EXPECT_EQ(error_offset(bytes), 0u);
  EXPECT_EQ(error_offset("FV"), 0u);
}

TEST(StreamIo, TruncatedHeader) { EXPECT_EQ(error_offset(header_bytes(2, 1, 0).substr(0, 10)), 10u); }

TEST(StreamIo, UnknownDtype) {
  std::istringstream in(header_bytes(2, 1, 0, 3));
  try {
    read_stream(in);
    FAIL();
  } catch (const StreamError& e) {
    EXPECT_EQ(e.offset(), 20u);
    EXPECT_NE(std::string(e.what()).find("dtype"), std::string::npos);
  }
}

TEST(StreamIo, NonFiniteValueRejected) {
  const float inf = std::numeric_limits<float>::infinity();
  EXPECT_EQ(error_offset(header_bytes(1, 3, 0) + f32_bytes({1, 2, 3, 4, inf, 6})), 21u + 16u);
  EXPECT_EQ(error_offset(header_bytes(1, 1, 0) + f32_bytes({std::nanf("")})), 21u);
}

TEST(StreamIo, ShortOfDeclaredFrameCount) {
  EXPECT_EQ(error_offset(header_bytes(1, 1, 3) + f32_bytes({1, 2})), 21u + 8u);
}

TEST(StreamIo, StopsAtDeclaredFrameCount) {
  std::istringstream in(header_bytes(1, 1, 2) + f32_bytes({1, 2, 3}));
  EXPECT_EQ(read_stream(in).size(), 2u);
}

// Arbitrary bytes either parse or fail with a StreamError; nothing else escapes.
TEST(StreamIo, RandomBytesAreHandled) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<int> len(0, 80);
  for (int trial = 0; trial < 2000; ++trial) {
    std::string bytes = trial % 2 ? header_bytes(1 + trial % 3, 1 + trial % 2, trial % 4) : std::string();
    const int extra = len(rng);
    for (int i = 0; i < extra; ++i) bytes.push_back(static_cast<char>(byte(rng)));
    if (trial % 7 == 0 && bytes.size() > 21) bytes[20] = 0;
    std::istringstream in(bytes);
    try {
      for (const auto& f : read_stream(in)) ASSERT_TRUE(f.all_finite());
    } catch (const StreamError& e) {
      EXPECT_LE(e.offset(), bytes.size());
    }
  }
}

TEST(SynthStream, ZeroNoiseRepeatsAnchor) {
  SynthOptions o;
  o.n_frames = 5;
  o.grid = 4;
  o.dim = 3;
  o.noise = 0.0;
  const auto frames = synth_frames(o);
  ASSERT_EQ(frames.size(), 5u);
  for (const auto& f : frames) EXPECT_EQ(f.tokens, frames[0].tokens);
}

TEST(SynthStream, ScenesAreSeparated) {
  SynthOptions o;
  o.n_frames = 30;
  o.n_scenes = 3;
  o.grid = 4;
  o.dim = 8;
  SynthStream s(o);
  EXPECT_EQ(s.scene_of(0), 0);
  EXPECT_EQ(s.scene_of(9), 0);
  EXPECT_EQ(s.scene_of(10), 1);
  EXPECT_EQ(s.scene_of(29), 2);

  const auto frames = synth_frames(o);
  double intra = 0.0;
  double inter = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < frames.size(); ++i)
    intra = std::max(intra, (frames[i].tokens - s.anchors()[s.scene_of(i)].tokens).norm());
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b) inter = std::min(inter, (s.anchors()[a].tokens - s.anchors()[b].tokens).norm());
  EXPECT_GE(inter / intra, 5.0);
}

TEST(SynthStream, SameSeedSameBytes) {
  SynthOptions o;
  o.n_frames = 7;
  o.grid = 4;
  o.dim = 5;
  o.seed = 99;
  std::ostringstream a, b, c;
  write_synth(a, o);
  write_synth(b, o);
  o.seed = 100;
  write_synth(c, o);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_NE(a.str(), c.str());
  EXPECT_EQ(a.str().size(), 21u + 7u * 16 * 5 * 4);
  std::istringstream in(a.str());
  EXPECT_EQ(read_stream(in).size(), 7u);
}

TEST(SynthStream, RejectsBadOptions) {
  SynthOptions o;
  o.n_scenes = 0;
  EXPECT_THROW(SynthStream{o}, Error);
  o = {};
  o.noise = -1;
  EXPECT_THROW(SynthStream{o}, Error);
}

}  // namespace
}  // namespace star
