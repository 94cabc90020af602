#include "star/stream_io.hpp"

#include "star/byte_io.hpp"

#include <cmath>
#include <istream>
#include <ostream>

namespace star {

namespace {
constexpr char kMagic[4] = {'F', 'V', 'S', '1'};
}

void write_header(std::ostream& out, const StreamHeader& header) {
  if (header.grid_side == 0 || header.dim == 0) throw Error("stream header: grid_side and dim must be >= 1");
  out.write(kMagic, 4);
  le::put_uint(out, header.grid_side);
  le::put_uint(out, header.dim);
  le::put_uint(out, header.frame_count);
  le::put_uint(out, header.dtype);
  if (!out) throw Error("stream header: write failed");
}

void write_frame(std::ostream& out, const FrameFeature& frame) {
  const double* data = frame.tokens.data();
  for (Eigen::Index i = 0; i < frame.tokens.size(); ++i) le::put_f32(out, static_cast<float>(data[i]));
  if (!out) throw Error("stream frame: write failed");
}

StreamReader::StreamReader(std::istream& in) : in_(in) {
  std::array<unsigned char, StreamHeader::kSize> raw{};
  const auto got = le::read_exact(in_, raw.data(), raw.size());
  if (got < 4 || std::memcmp(raw.data(), kMagic, 4) != 0) throw StreamError("bad magic, expected FVS1", 0);
  if (got < raw.size()) throw StreamError("truncated header", got);
  header_.grid_side = le::get_uint<std::uint32_t>(raw.data() + 4);
  header_.dim = le::get_uint<std::uint32_t>(raw.data() + 8);
  header_.frame_count = le::get_uint<std::uint64_t>(raw.data() + 12);
  header_.dtype = raw[20];
  if (header_.grid_side == 0) throw StreamError("grid_side must be >= 1", 4);
  if (header_.dim == 0) throw StreamError("dim must be >= 1", 8);
  if (header_.dtype != StreamHeader::kDtypeF32)
    throw StreamError("unknown dtype tag " + std::to_string(header_.dtype), 20);
  offset_ = StreamHeader::kSize;
  scratch_.resize(header_.frame_bytes());
  values_.resize(scratch_.size() / 4);
}

std::optional<FrameFeature> StreamReader::next() {
  if (header_.frame_count != 0 && frames_read_ == header_.frame_count) return std::nullopt;
  const auto got = le::read_exact(in_, scratch_.data(), scratch_.size());
  if (got == 0) {
    if (header_.frame_count != 0) {
      throw StreamError("stream ended after " + std::to_string(frames_read_) + " of " +
                            std::to_string(header_.frame_count) + " frames",
                        offset_);
    }
    return std::nullopt;
  }
  if (got < scratch_.size()) {
    throw StreamError("truncated frame " + std::to_string(frames_read_) + " (" + std::to_string(got) + " of " +
                          std::to_string(scratch_.size()) + " bytes)",
                      offset_ + got);
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    values_[i] = le::get_f32(scratch_.data() + 4 * i);
    if (!std::isfinite(values_[i])) throw StreamError("non-finite value", offset_ + 4 * i);
  }
  offset_ += got;
  ++frames_read_;
  auto f = FrameFeatureF::from_flat(static_cast<int>(header_.grid_side), static_cast<int>(header_.dim), values_);
  return f.cast<double>();
}

std::vector<FrameFeature> read_stream(std::istream& in) {
  StreamReader reader(in);
  std::vector<FrameFeature> frames;
  while (auto f = reader.next()) frames.push_back(std::move(*f));
  return frames;
}

SynthStream::SynthStream(const SynthOptions& options) : options_(options), rng_(options.seed) {
  if (options.grid <= 0 || options.dim <= 0) throw Error("synth: grid and dim must be positive");
  if (options.n_scenes <= 0) throw Error("synth: n_scenes must be positive");
  if (options.n_frames < static_cast<std::uint64_t>(options.n_scenes))
    throw Error("synth: n_scenes must not exceed n_frames");
  if (!(options.noise >= 0.0) || !std::isfinite(options.noise)) throw Error("synth: noise must be finite and >= 0");

  std::normal_distribution<double> normal(0.0, 1.0);
  const auto rows = static_cast<Eigen::Index>(options.grid) * options.grid;
  const double elements = static_cast<double>(rows) * options.dim;
  for (int s = 0; s < options.n_scenes; ++s) {
    TokenMatrixd a(rows, options.dim);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = normal(rng_);
    noise_std_.push_back(options.noise * a.norm() / std::sqrt(elements));
    anchors_.emplace_back(options.grid, std::move(a));
  }
}

int SynthStream::scene_of(std::uint64_t frame) const {
  return static_cast<int>(frame * static_cast<std::uint64_t>(options_.n_scenes) / options_.n_frames);
}

StreamHeader SynthStream::header() const {
  StreamHeader h;
  h.grid_side = static_cast<std::uint32_t>(options_.grid);
  h.dim = static_cast<std::uint32_t>(options_.dim);
  h.frame_count = options_.n_frames;
  return h;
}

std::optional<FrameFeature> SynthStream::next() {
  if (emitted_ == options_.n_frames) return std::nullopt;
  const int scene = scene_of(emitted_);
  FrameFeature f = anchors_[scene];
  if (noise_std_[scene] > 0.0) {
    std::normal_distribution<double> normal(0.0, noise_std_[scene]);
    for (Eigen::Index i = 0; i < f.tokens.size(); ++i) f.tokens.data()[i] += normal(rng_);
  }
  ++emitted_;
  return f;
}

std::vector<FrameFeature> synth_frames(const SynthOptions& options) {
  SynthStream stream(options);
  std::vector<FrameFeature> out;
  out.reserve(options.n_frames);
  while (auto f = stream.next()) out.push_back(std::move(*f));
  return out;
}

void write_synth(std::ostream& out, const SynthOptions& options) {
  SynthStream stream(options);
  write_header(out, stream.header());
  while (auto f = stream.next()) write_frame(out, *f);
}

}  // namespace star
