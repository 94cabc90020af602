// Command-line front end for the streaming memory engine.

#include "star/bench.hpp"
#include "star/engine.hpp"
#include "star/stream_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace {

using star::Engine;
using star::MemoryConfig;

struct StreamSource {
  std::ifstream file;
  std::istream* in = nullptr;

  explicit StreamSource(const std::string& path) {
    if (path == "-") {
      in = &std::cin;
      return;
    }
    file.open(path, std::ios::binary);
    if (!file) throw star::Error("cannot open stream " + path);
    in = &file;
  }
};

MemoryConfig config_from(const std::string& path, int dim) {
  MemoryConfig cfg = path.empty() ? MemoryConfig{} : star::load_config_json(path);
  if (dim > 0) cfg.dim = dim;
  return cfg;
}

std::unique_ptr<Engine> make_engine(MemoryConfig cfg, int grid, const std::string& params_path) {
  if (params_path.empty()) return std::make_unique<Engine>(cfg, grid);
  auto params = star::load_attention_params_file(params_path);
  cfg.decay_alpha = params.decay_alpha;
  return std::make_unique<Engine>(cfg, grid, std::move(params));
}

std::string read_text_or_literal(const std::string& arg) {
  if (std::filesystem::is_regular_file(arg)) {
    std::ifstream in(arg);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  return arg;
}

std::vector<std::uint64_t> parse_counts(const std::string& list) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoull(item));
  }
  if (out.empty()) throw star::Error("--frames needs at least one count");
  return out;
}

void print_frame_row(std::ostream& out, const Engine& engine, std::uint64_t version) {
  const auto snap = engine.read_snapshot();
  out << snap->timestamp_frame << ',' << version << ',' << snap->token_count();
  for (const auto& r : snap->banks) out << ',' << r.length;
  out << ',' << engine.memory().temporal.total_weight() << '\n';
}

int run_synth(std::uint64_t seed, std::uint64_t frames, int scenes, int grid, int dim, double noise,
              const std::string& out_path) {
  star::SynthOptions opts{seed, frames, scenes, grid, dim, noise};
  if (out_path == "-") {
    star::write_synth(std::cout, opts);
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw star::Error("cannot open output " + out_path);
    star::write_synth(out, opts);
  }
  return 0;
}

int run_ingest(const std::string& stream_path, const std::string& config_path, const std::string& params_path,
               std::uint64_t every) {
  StreamSource src(stream_path);
  star::StreamReader reader(*src.in);
  auto engine = make_engine(config_from(config_path, static_cast<int>(reader.header().dim)),
                            static_cast<int>(reader.header().grid_side), params_path);
  std::cout << "frame,version,tokens,spatial,temporal,abstract,retrieved,weight_sum\n";
  std::uint64_t version = 0;
  while (auto f = reader.next()) {
    version = engine->ingest_frame(*f);
    if (every > 0 && version % every == 0) print_frame_row(std::cout, *engine, version);
  }
  if (every == 0 || version % every != 0) print_frame_row(std::cout, *engine, version);
  return 0;
}

int run_bench(const std::string& frames, int queries, int readers, const std::string& config_path, int grid,
              std::uint64_t seed, bool baseline, const std::string& out_path) {
  star::BenchOptions opts;
  opts.frame_counts = parse_counts(frames);
  opts.queries = queries;
  opts.readers = readers;
  opts.keep_all_baseline = baseline;
  opts.synth.grid = grid;
  opts.synth.seed = seed;
  opts.synth.n_scenes = 3;
  const auto report = star::bench_latency(config_from(config_path, 0), opts);
  if (out_path.empty()) {
    star::write_latency_csv(std::cout, report);
  } else {
    std::ofstream out(out_path);
    star::write_latency_csv(out, report);
    std::cout << "flatness " << report.flatness << (report.flat ? " (flat)" : " (not flat)") << '\n';
  }
  return 0;
}

// Triplets: JSON array of {"id": string|number, "frame_timestamp": integer}.
int run_replay(const std::string& triplets_path, const std::string& stream_path, const std::string& config_path,
               bool after) {
  std::ifstream tin(triplets_path);
  if (!tin) throw star::Error("cannot open triplets " + triplets_path);
  nlohmann::json triplets;
  try {
    triplets = nlohmann::json::parse(tin);
  } catch (const nlohmann::json::exception& e) {
    throw star::Error(std::string("triplets: ") + e.what());
  }
  if (!triplets.is_array()) throw star::Error("triplets: expected a JSON array");

  struct Query {
    std::string id;
    std::uint64_t timestamp;
  };
  std::vector<Query> queries;
  for (const auto& t : triplets) {
    if (!t.is_object() || !t.contains("id") || !t.contains("frame_timestamp"))
      throw star::Error("triplets: each entry needs id and frame_timestamp");
    const auto& id = t.at("id");
    queries.push_back({id.is_string() ? id.get<std::string>() : id.dump(), t.at("frame_timestamp").get<std::uint64_t>()});
  }
  std::stable_sort(queries.begin(), queries.end(), [](const Query& a, const Query& b) { return a.timestamp < b.timestamp; });

  StreamSource src(stream_path);
  star::StreamReader reader(*src.in);
  auto engine = make_engine(config_from(config_path, static_cast<int>(reader.header().dim)),
                            static_cast<int>(reader.header().grid_side), "");

  const auto emit = [&](const Query& q) {
    const auto r = engine->query_at(q.id, q.timestamp);
    nlohmann::json line = {{"id", r.question_id},
                           {"frame_timestamp", q.timestamp},
                           {"version", r.snapshot->version},
                           {"snapshot_frame", r.snapshot->timestamp_frame},
                           {"stale", r.stale},
                           {"tokens", r.snapshot->token_count()}};
    std::cout << line.dump() << '\n';
  };

  std::size_t next = 0;
  if (!after) {
    while (next < queries.size() && queries[next].timestamp == 0) emit(queries[next++]);
  }
  while (auto f = reader.next()) {
    const auto version = engine->ingest_frame(*f);
    if (after) continue;
    while (next < queries.size() && queries[next].timestamp <= version) emit(queries[next++]);
  }
  while (next < queries.size()) emit(queries[next++]);
  return 0;
}

int run_sweep(const std::string& grid_arg, std::uint64_t frames, int queries, int grid, const std::string& config_path,
              const std::string& out_path) {
  const auto sweep_grid =
      grid_arg == "default" ? star::default_sweep_grid() : star::parse_sweep_grid(read_text_or_literal(grid_arg));
  star::SweepOptions opts;
  opts.frames = frames;
  opts.queries = queries;
  opts.synth.grid = grid;
  opts.synth.n_scenes = 3;
  const auto base = config_from(config_path, 0);
  opts.synth.dim = base.dim;
  const auto rows = star::sweep_ablation(base, sweep_grid, opts);
  if (out_path.empty()) {
    star::write_sweep_csv(std::cout, rows);
  } else {
    std::ofstream out(out_path);
    star::write_sweep_csv(out, rows);
  }
  return 0;
}

int run_export_pca(const std::string& stream_path, std::uint64_t at_frame, const std::string& config_path,
                   const std::string& out_path) {
  StreamSource src(stream_path);
  star::StreamReader reader(*src.in);
  auto engine = make_engine(config_from(config_path, static_cast<int>(reader.header().dim)),
                            static_cast<int>(reader.header().grid_side), "");
  std::vector<star::FrameFeature> raw;
  while (raw.size() < at_frame) {
    auto f = reader.next();
    if (!f) break;
    engine->ingest_frame(*f);
    raw.push_back(std::move(*f));
  }
  if (raw.size() < at_frame) std::cerr << "stream ended at frame " << raw.size() << '\n';
  const auto pca = star::export_memory_pca(*engine->read_snapshot(), raw);
  if (pca.degenerate) std::cerr << "warning: degenerate principal axis\n";
  if (out_path.empty()) {
    star::write_pca_csv(std::cout, pca);
  } else {
    std::ofstream out(out_path);
    star::write_pca_csv(out, pca);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming STAR memory engine"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;

  auto* synth = app.add_subcommand("synth", "Write a synthetic scene-structured FVS1 stream");
  std::uint64_t seed = 0;
  std::uint64_t frames = 100;
  int scenes = 1;
  int grid = 16;
  int dim = 64;
  double noise = 0.05;
  synth->add_option("--seed", seed, "RNG seed");
  synth->add_option("--frames", frames, "Number of frames")->required();
  synth->add_option("--scenes", scenes, "Number of contiguous scenes");
  synth->add_option("--grid", grid, "Grid side P");
  synth->add_option("--dim", dim, "Token dimension D");
  synth->add_option("--noise", noise, "Noise norm relative to the anchor norm");
  std::string synth_out = "-";
  synth->add_option("-o,--out", synth_out, "Output file, '-' for stdout");

  auto* ingest = app.add_subcommand("ingest", "Ingest an FVS1 stream and report bank sizes");
  std::string stream_path;
  std::string params_path;
  std::uint64_t every = 0;
  ingest->add_option("stream", stream_path, "FVS1 file or '-' for stdin")->required();
  ingest->add_option("--config", config_path, "MemoryConfig JSON");
  ingest->add_option("--params", params_path, "Attention params file (SAP1)");
  ingest->add_option("--every", every, "Print a row every N frames (0 = final only)");

  auto* bench = app.add_subcommand("bench", "Read latency versus stream length");
  std::string frame_list = "1000,10000";
  int queries = 32;
  int readers = 4;
  bool no_baseline = false;
  bench->add_option("--frames", frame_list, "Comma-separated frame counts");
  bench->add_option("--queries", queries, "Reads per frame count");
  bench->add_option("--readers", readers, "Concurrent reader threads");
  bench->add_option("--config", config_path, "MemoryConfig JSON");
  bench->add_option("--grid", grid, "Synthetic grid side P");
  bench->add_option("--seed", seed, "Synthetic stream seed");
  bench->add_flag("--no-baseline", no_baseline, "Skip the keep-all baseline");
  bench->add_option("-o,--out", out_path, "CSV output file");

  auto* replay = app.add_subcommand("replay", "Answer timestamped queries against a stream");
  std::string triplets_path;
  bool after = false;
  replay->add_option("triplets", triplets_path, "JSON array of {id, frame_timestamp}")->required();
  replay->add_option("stream", stream_path, "FVS1 file or '-'")->required();
  replay->add_option("--config", config_path, "MemoryConfig JSON");
  replay->add_flag("--after", after, "Issue all queries after the whole stream is ingested");

  auto* sweep = app.add_subcommand("sweep", "Budget ablation over memory sizes");
  std::string grid_spec = "default";
  std::uint64_t sweep_frames = 200;
  int sweep_queries = 16;
  sweep->add_option("--grid", grid_spec, "Grid JSON (file or literal) or 'default'");
  sweep->add_option("--frames", sweep_frames, "Frames per cell");
  sweep->add_option("--queries", sweep_queries, "Reads per cell");
  sweep->add_option("--input-grid", grid, "Synthetic grid side P");
  sweep->add_option("--config", config_path, "Base MemoryConfig JSON");
  sweep->add_option("-o,--out", out_path, "CSV output file");

  auto* pca = app.add_subcommand("export-pca", "2-D PCA of memory and raw tokens");
  std::uint64_t at_frame = 0;
  pca->add_option("stream", stream_path, "FVS1 file or '-'")->required();
  pca->add_option("--at-frame", at_frame, "Frame count to ingest before exporting")->required();
  pca->add_option("--config", config_path, "MemoryConfig JSON");
  pca->add_option("-o,--out", out_path, "CSV output file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) return run_synth(seed, frames, scenes, grid, dim, noise, synth_out);
    if (*ingest) return run_ingest(stream_path, config_path, params_path, every);
    if (*bench) return run_bench(frame_list, queries, readers, config_path, grid, seed, !no_baseline, out_path);
    if (*replay) return run_replay(triplets_path, stream_path, config_path, after);
    if (*sweep) return run_sweep(grid_spec, sweep_frames, sweep_queries, grid, config_path, out_path);
    if (*pca) return run_export_pca(stream_path, at_frame, config_path, out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
