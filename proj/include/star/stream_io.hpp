#pragma once

#include "star/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <vector>

namespace star {

// FVS1 feature stream, all fields little-endian:
//   magic "FVS1" | grid_side u32 | dim u32 | frame_count u64 (0 = unbounded) | dtype u8 (0 = f32)
// followed by frames of grid_side * grid_side * dim f32 values, row-major.
struct StreamHeader {
  static constexpr std::size_t kSize = 21;
  static constexpr std::uint8_t kDtypeF32 = 0;

  std::uint32_t grid_side = 0;
  std::uint32_t dim = 0;
  std::uint64_t frame_count = 0;
  std::uint8_t dtype = kDtypeF32;

  std::size_t frame_bytes() const { return static_cast<std::size_t>(grid_side) * grid_side * dim * 4; }
};

class StreamError : public Error {
 public:
  StreamError(const std::string& what, std::uint64_t offset)
      : Error(what + " at byte offset " + std::to_string(offset)), offset_(offset) {}
  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

void write_header(std::ostream& out, const StreamHeader& header);
void write_frame(std::ostream& out, const FrameFeature& frame);

// Pull-style reader; frames come back converted to double.
class StreamReader {
 public:
  explicit StreamReader(std::istream& in);

  const StreamHeader& header() const { return header_; }
  // Next frame, or nullopt at a clean end of stream.
  std::optional<FrameFeature> next();
  std::uint64_t frames_read() const { return frames_read_; }
  std::uint64_t offset() const { return offset_; }

 private:
  std::istream& in_;
  StreamHeader header_;
  std::uint64_t offset_ = 0;
  std::uint64_t frames_read_ = 0;
  std::vector<unsigned char> scratch_;
  std::vector<float> values_;
};

std::vector<FrameFeature> read_stream(std::istream& in);

struct SynthOptions {
  std::uint64_t seed = 0;
  std::uint64_t n_frames = 100;
  int n_scenes = 1;
  int grid = 16;
  int dim = 64;
  // Per-frame noise norm as a fraction of the scene anchor norm.
  double noise = 0.05;
};

// Deterministic scene-structured stream standing in for a frame encoder.
// Frames are split into n_scenes contiguous runs; every frame of a scene is
// its anchor (i.i.d. standard normal) plus Gaussian noise.
class SynthStream {
 public:
  explicit SynthStream(const SynthOptions& options);

  std::optional<FrameFeature> next();
  const SynthOptions& options() const { return options_; }
  int scene_of(std::uint64_t frame) const;  // 0-based frame index
  const std::vector<FrameFeature>& anchors() const { return anchors_; }
  StreamHeader header() const;

 private:
  SynthOptions options_;
  std::vector<FrameFeature> anchors_;
  std::vector<double> noise_std_;
  std::mt19937_64 rng_;
  std::uint64_t emitted_ = 0;
};

std::vector<FrameFeature> synth_frames(const SynthOptions& options);
void write_synth(std::ostream& out, const SynthOptions& options);

}  // namespace star
