#pragma once

#include "star/engine.hpp"
#include "star/stream_io.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace star {

// "Keep everything" reference point: every pooled frame stays resident and a
// read touches all of them.
class KeepAllBaseline {
 public:
  explicit KeepAllBaseline(int p_spa) : p_spa_(p_spa) {}
  void push(const FrameFeature& raw);
  std::int64_t token_count() const;
  double consume() const;  // sum over all resident tokens

 private:
  int p_spa_;
  std::vector<TokenMatrixd> frames_;
};

struct LatencyRow {
  std::string mode;  // "star" or "keep-all"
  std::uint64_t frames = 0;
  double read_median_us = 0.0;
  double read_p95_us = 0.0;
  double ingest_fps = 0.0;
  std::int64_t bank_tokens = 0;
  std::int64_t buffer_tokens = 0;
  std::int64_t rss_kb = 0;  // informational only
};

struct LatencyReport {
  std::vector<LatencyRow> rows;
  // max / min median read latency over the "star" rows.
  double flatness = 0.0;
  bool flat = false;
};

struct BenchOptions {
  std::vector<std::uint64_t> frame_counts{1000, 10000};
  int queries = 32;
  int readers = 4;
  bool keep_all_baseline = true;
  double flatness_limit = 1.5;
  SynthOptions synth{};
};

// Ingests a synthetic stream up to each frame count, then times `queries`
// snapshot reads issued from `readers` concurrent threads.
LatencyReport bench_latency(const MemoryConfig& config, const BenchOptions& options);
void write_latency_csv(std::ostream& out, const LatencyReport& report);

struct SweepCell {
  std::array<int, 3> sizes{};   // p_spa, p_tem, p_abs
  std::array<int, 4> counts{};  // n_spa, n_tem, n_abs, n_ret
};

// Cells are either the full cross product of `sizes` x `counts`, or ("axes")
// each axis varied with the other held at the base config.
struct SweepGrid {
  std::vector<std::array<int, 3>> sizes;
  std::vector<std::array<int, 4>> counts;
  bool cross = false;

  std::vector<SweepCell> cells(const MemoryConfig& base) const;
};

// Grid JSON: {"sizes": [[p_spa,p_tem,p_abs],...], "counts": [[n_spa,n_tem,n_abs,n_ret],...],
//             "mode": "axes" | "cross"}
SweepGrid parse_sweep_grid(const std::string& json_text);
// The spatial-size and temporal-length axes of the budget ablation.
SweepGrid default_sweep_grid();

struct SweepRow {
  SweepCell cell;
  bool valid = false;
  std::string reason;  // skip reason or first invariant violation
  std::int64_t budget = 0;
  std::int64_t final_tokens = 0;
  bool invariants_ok = false;
  double ingest_fps = 0.0;
  double read_median_us = 0.0;
};

struct SweepOptions {
  std::uint64_t frames = 200;
  int queries = 16;
  SynthOptions synth{};
};

SweepRow run_sweep_cell(const MemoryConfig& base, const SweepCell& cell, const SweepOptions& options);
std::vector<SweepRow> sweep_ablation(const MemoryConfig& base, const SweepGrid& grid, const SweepOptions& options);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

struct PcaPoint {
  double x = 0.0;
  double y = 0.0;
  std::string label;  // "memory" or "raw"
  std::string bank;   // spatial/temporal/abstract/retrieved, or "raw"
  std::size_t index = 0;  // token index within its bank, or frame * P^2 + token for raw
};

struct PcaExport {
  std::vector<PcaPoint> points;
  std::array<double, 2> variances{};
  bool degenerate = false;
};

// Joint 2-D PCA of the snapshot tokens and every raw frame token.
PcaExport export_memory_pca(const MemorySnapshot& snapshot, std::span<const FrameFeature> raw_frames);
void write_pca_csv(std::ostream& out, const PcaExport& pca);

// Resident set size of this process in KiB, or 0 where unavailable.
std::int64_t resident_kb();

}  // namespace star
