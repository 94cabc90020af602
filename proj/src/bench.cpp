#include "star/bench.hpp"

#include "star/pca.hpp"
#include "star/pooling.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <latch>
#include <ostream>
#include <thread>

namespace star {

namespace {

using Clock = std::chrono::steady_clock;

double micros(Clock::duration d) { return std::chrono::duration<double, std::micro>(d).count(); }

double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  if (q == 0.5) {
    const auto m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
  }
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size())));
  return v[std::clamp<std::size_t>(rank, 1, v.size()) - 1];
}

std::atomic<double> g_sink{0.0};

// Runs `queries` timed calls of `read` spread over `readers` threads that start together.
template <typename Read>
std::vector<double> timed_reads(int queries, int readers, const Read& read) {
  readers = std::max(1, std::min(readers, queries));
  std::vector<std::vector<double>> per_thread(static_cast<std::size_t>(readers));
  std::latch start(readers);
  {
    std::vector<std::jthread> threads;
    for (int r = 0; r < readers; ++r) {
      const int share = queries / readers + (r < queries % readers ? 1 : 0);
      threads.emplace_back([&, r, share] {
        start.arrive_and_wait();
        double local = 0.0;
        for (int q = 0; q < share; ++q) {
          const auto t0 = Clock::now();
          local += read();
          per_thread[r].push_back(micros(Clock::now() - t0));
        }
        g_sink.store(local, std::memory_order_relaxed);
      });
    }
  }
  std::vector<double> all;
  for (auto& v : per_thread) all.insert(all.end(), v.begin(), v.end());
  return all;
}

}  // namespace

std::int64_t resident_kb() {
  std::ifstream status("/proc/self/status");
  std::string key;
  while (status >> key) {
    if (key == "VmRSS:") {
      std::int64_t kb = 0;
      status >> kb;
      return kb;
    }
    status.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
  }
  return 0;
}

void KeepAllBaseline::push(const FrameFeature& raw) { frames_.push_back(average_pool(raw, p_spa_).tokens); }

std::int64_t KeepAllBaseline::token_count() const {
  return static_cast<std::int64_t>(frames_.size()) * p_spa_ * p_spa_;
}

double KeepAllBaseline::consume() const {
  double total = 0.0;
  for (const auto& f : frames_) total += f.sum();
  return total;
}

LatencyReport bench_latency(const MemoryConfig& config, const BenchOptions& options) {
  auto counts = options.frame_counts;
  std::sort(counts.begin(), counts.end());
  counts.erase(std::unique(counts.begin(), counts.end()), counts.end());

  SynthOptions synth = options.synth;
  synth.n_frames = counts.empty() ? 0 : counts.back();
  synth.dim = config.dim;
  synth.n_scenes = static_cast<int>(std::min<std::uint64_t>(static_cast<std::uint64_t>(std::max(synth.n_scenes, 1)),
                                                            std::max<std::uint64_t>(synth.n_frames, 1)));
  LatencyReport report;
  if (counts.empty() || counts.front() == 0) return report;

  SynthStream stream(synth);
  Engine engine(config, synth.grid);
  KeepAllBaseline baseline(config.p_spa);

  const auto star_read = [&engine] { return engine.read_snapshot()->tokens.sum(); };
  const auto keep_read = [&baseline] { return baseline.consume(); };

  std::uint64_t ingested = 0;
  for (auto target : counts) {
    const auto t0 = Clock::now();
    const auto begin_count = ingested;
    while (ingested < target) {
      auto f = stream.next();
      engine.ingest_frame(*f);
      if (options.keep_all_baseline) baseline.push(*f);
      ++ingested;
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();

    // One untimed read warms caches so the first sample is not an outlier.
    star_read();
    auto samples = timed_reads(options.queries, options.readers, star_read);
    LatencyRow row;
    row.mode = "star";
    row.frames = target;
    row.read_median_us = percentile(samples, 0.5);
    row.read_p95_us = percentile(samples, 0.95);
    row.ingest_fps = seconds > 0 ? static_cast<double>(target - begin_count) / seconds : 0.0;
    row.bank_tokens = engine.memory().token_count();
    row.buffer_tokens = engine.memory().buffer.token_count();
    row.rss_kb = resident_kb();
    report.rows.push_back(row);

    if (options.keep_all_baseline) {
      auto base_samples = timed_reads(options.queries, options.readers, keep_read);
      LatencyRow b;
      b.mode = "keep-all";
      b.frames = target;
      b.read_median_us = percentile(base_samples, 0.5);
      b.read_p95_us = percentile(base_samples, 0.95);
      b.bank_tokens = baseline.token_count();
      b.buffer_tokens = 0;
      b.rss_kb = resident_kb();
      report.rows.push_back(b);
    }
  }

  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& r : report.rows) {
    if (r.mode != "star") continue;
    lo = std::min(lo, r.read_median_us);
    hi = std::max(hi, r.read_median_us);
  }
  report.flatness = lo > 0 ? hi / lo : std::numeric_limits<double>::infinity();
  report.flat = report.flatness <= options.flatness_limit;
  return report;
}

void write_latency_csv(std::ostream& out, const LatencyReport& report) {
  out << "mode,frames,read_median_us,read_p95_us,ingest_fps,bank_tokens,buffer_tokens,rss_kb\n";
  out << std::setprecision(6);
  for (const auto& r : report.rows) {
    out << r.mode << ',' << r.frames << ',' << r.read_median_us << ',' << r.read_p95_us << ',' << r.ingest_fps << ','
        << r.bank_tokens << ',' << r.buffer_tokens << ',' << r.rss_kb << '\n';
  }
  out << "# flatness," << report.flatness << ',' << (report.flat ? "flat" : "not-flat") << '\n';
}

std::vector<SweepCell> SweepGrid::cells(const MemoryConfig& base) const {
  const std::array<int, 3> base_sizes{base.p_spa, base.p_tem, base.p_abs};
  const std::array<int, 4> base_counts{base.n_spa, base.n_tem, base.n_abs, base.n_ret};
  std::vector<SweepCell> out;
  if (cross) {
    for (const auto& s : sizes)
      for (const auto& c : counts) out.push_back({s, c});
    return out;
  }
  for (const auto& s : sizes) out.push_back({s, base_counts});
  for (const auto& c : counts) out.push_back({base_sizes, c});
  return out;
}

SweepGrid parse_sweep_grid(const std::string& json_text) {
  SweepGrid grid;
  try {
    const auto j = nlohmann::json::parse(json_text);
    if (j.contains("sizes")) grid.sizes = j.at("sizes").get<std::vector<std::array<int, 3>>>();
    if (j.contains("counts")) grid.counts = j.at("counts").get<std::vector<std::array<int, 4>>>();
    const auto mode = j.value("mode", std::string("axes"));
    if (mode != "axes" && mode != "cross") throw Error("sweep grid: mode must be \"axes\" or \"cross\"");
    grid.cross = mode == "cross";
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("sweep grid: ") + e.what());
  }
  return grid;
}

SweepGrid default_sweep_grid() {
  SweepGrid g;
  g.sizes = {{16, 4, 1}, {4, 4, 1}, {8, 8, 1}, {8, 1, 1}, {8, 4, 4}, {8, 4, 1}};
  g.counts = {{1, 32, 32, 3}, {1, 16, 16, 3}, {1, 8, 8, 3}, {1, 25, 25, 3}};
  return g;
}

SweepRow run_sweep_cell(const MemoryConfig& base, const SweepCell& cell, const SweepOptions& options) {
  SweepRow row;
  row.cell = cell;
  MemoryConfig cfg = base;
  std::tie(cfg.p_spa, cfg.p_tem, cfg.p_abs) = std::tuple(cell.sizes[0], cell.sizes[1], cell.sizes[2]);
  std::tie(cfg.n_spa, cfg.n_tem, cfg.n_abs, cfg.n_ret) =
      std::tuple(cell.counts[0], cell.counts[1], cell.counts[2], cell.counts[3]);
  cfg.dim = options.synth.dim;
  row.budget = max_tokens(cfg);
  if (auto err = validate_config(cfg, options.synth.grid)) {
    row.reason = "skipped: " + err->message;
    return row;
  }
  row.valid = true;
  row.invariants_ok = true;

  SynthOptions synth = options.synth;
  synth.n_frames = std::max<std::uint64_t>(options.frames, 1);
  synth.n_scenes = static_cast<int>(std::min<std::uint64_t>(static_cast<std::uint64_t>(std::max(synth.n_scenes, 1)),
                                                            synth.n_frames));
  SynthStream stream(synth);
  Engine engine(cfg, synth.grid);
  const auto full_from = static_cast<std::uint64_t>(std::max(cfg.n_spa, cfg.n_tem + 1));
  const auto fail = [&row](std::string why) {
    if (row.invariants_ok) row.reason = std::move(why);
    row.invariants_ok = false;
  };

  const auto t0 = Clock::now();
  while (auto f = stream.next()) {
    engine.ingest_frame(*f);
    const auto snap = engine.read_snapshot();
    const auto t = snap->timestamp_frame;
    const auto tokens = static_cast<std::int64_t>(snap->token_count());
    if (!snap->verify()) fail("snapshot checksum mismatch at t=" + std::to_string(t));
    if (tokens > row.budget) fail("token budget exceeded at t=" + std::to_string(t));
    if (t >= full_from && tokens != row.budget) fail("budget not filled at t=" + std::to_string(t));
    if (std::abs(engine.memory().temporal.total_weight() - static_cast<double>(t)) > 1e-9)
      fail("weight conservation violated at t=" + std::to_string(t));
  }
  const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  row.ingest_fps = seconds > 0 ? static_cast<double>(synth.n_frames) / seconds : 0.0;
  row.final_tokens = static_cast<std::int64_t>(engine.read_snapshot()->token_count());
  const auto samples = timed_reads(options.queries, 1, [&engine] { return engine.read_snapshot()->tokens.sum(); });
  row.read_median_us = percentile(samples, 0.5);
  return row;
}

std::vector<SweepRow> sweep_ablation(const MemoryConfig& base, const SweepGrid& grid, const SweepOptions& options) {
  std::vector<SweepRow> rows;
  for (const auto& cell : grid.cells(base)) rows.push_back(run_sweep_cell(base, cell, options));
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "p_spa,p_tem,p_abs,n_spa,n_tem,n_abs,n_ret,budget,final_tokens,valid,invariants_ok,ingest_fps,"
         "read_median_us,reason\n";
  out << std::setprecision(6);
  for (const auto& r : rows) {
    for (int v : r.cell.sizes) out << v << ',';
    for (int v : r.cell.counts) out << v << ',';
    out << r.budget << ',' << r.final_tokens << ',' << (r.valid ? 1 : 0) << ',' << (r.invariants_ok ? 1 : 0) << ','
        << r.ingest_fps << ',' << r.read_median_us << ',' << '"' << r.reason << '"' << '\n';
  }
}

PcaExport export_memory_pca(const MemorySnapshot& snapshot, std::span<const FrameFeature> raw_frames) {
  const auto dim = snapshot.tokens.cols();
  Eigen::Index raw_tokens = 0;
  for (const auto& f : raw_frames) {
    if (f.dim() != dim) throw Error("export_memory_pca: raw frame dim differs from snapshot dim");
    raw_tokens += f.token_count();
  }
  TokenMatrixd all(snapshot.tokens.rows() + raw_tokens, dim);
  all.topRows(snapshot.tokens.rows()) = snapshot.tokens;
  Eigen::Index row = snapshot.tokens.rows();
  for (const auto& f : raw_frames) {
    all.middleRows(row, f.token_count()) = f.tokens;
    row += f.token_count();
  }

  const auto pca = pca_top2(all);
  PcaExport out;
  out.variances = pca.variances;
  out.degenerate = pca.degenerate;
  out.points.reserve(static_cast<std::size_t>(all.rows()));
  for (int b = 0; b < 4; ++b) {
    const auto& r = snapshot.banks[b];
    for (std::size_t i = 0; i < r.length; ++i) {
      const auto k = static_cast<Eigen::Index>(r.start + i);
      out.points.push_back({pca.coords(k, 0), pca.coords(k, 1), "memory", bank_name(static_cast<Bank>(b)), i});
    }
  }
  for (Eigen::Index k = snapshot.tokens.rows(); k < all.rows(); ++k) {
    out.points.push_back({pca.coords(k, 0), pca.coords(k, 1), "raw", "raw",
                          static_cast<std::size_t>(k - snapshot.tokens.rows())});
  }
  return out;
}

void write_pca_csv(std::ostream& out, const PcaExport& pca) {
  out << "x,y,label,bank,index\n";
  out << std::setprecision(17);
  for (const auto& p : pca.points) out << p.x << ',' << p.y << ',' << p.label << ',' << p.bank << ',' << p.index << '\n';
  if (pca.degenerate) out << "# degenerate-axis\n";
}

}  // namespace star
