// Copyright 2026 The roomsir Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// roomsir command-line driver: trace, filter, auralize, bench.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "roomsir/auralize.hpp"
#include "roomsir/bench.hpp"
#include "roomsir/error.hpp"
#include "roomsir/hoa.hpp"
#include "roomsir/pathstore.hpp"
#include "roomsir/scene_io.hpp"
#include "roomsir/tracer.hpp"

namespace fs = std::filesystem;
using namespace roomsir;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

std::uint32_t default_workers() {
  const char* env = std::getenv("ROOMSIR_WORKERS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const unsigned long v = std::strtoul(env, &end, 10);
  if (*end != '\0' || v == 0 || v > 1024) {
    throw UsageError("ROOMSIR_WORKERS must be an integer in [1, 1024]");
  }
  return static_cast<std::uint32_t>(v);
}

void require_file(const fs::path& p, const char* what) {
  if (!fs::is_regular_file(p)) throw UsageError(std::string(what) + " not found: " + p.string());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct TraceArgs {
  std::string scene;
  std::string config;
  std::string output;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> workers;
  std::string bands;
  std::vector<std::string> set;
};

int cmd_trace(const TraceArgs& a) {
  require_file(a.scene, "scene");
  SceneOverrides overrides;
  for (const auto& kv : a.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--set expects key=value, got '" + kv + "'");
    overrides[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  if (!a.bands.empty()) overrides["bands"] = a.bands;
  const Scene scene = load_scene(a.scene, overrides);

  SimConfig config;
  if (!a.config.empty()) {
    require_file(a.config, "config");
    config = parse_sim_config(slurp(a.config));
  }
  if (a.seed) config.rng_seed = *a.seed;
  config.workers = a.workers ? *a.workers : default_workers();

  const auto t0 = std::chrono::steady_clock::now();
  const PathSet paths = trace(scene, config);
  const double elapsed = seconds_since(t0);
  write_paths(paths, a.output);

  std::printf("direct    %zu\n", paths.count(PathType::kDirect));
  std::printf("specular  %zu\n", paths.count(PathType::kSpecular));
  std::printf("diffuse   %zu\n", paths.count(PathType::kDiffuse));
  std::printf("total     %zu\n", paths.size());
  std::printf("elapsed   %.3f s\n", elapsed);
  return 0;
}

struct FilterArgs {
  std::string input;
  std::string output;
  std::optional<std::uint64_t> top_count;
  std::optional<double> top_fraction;
  std::optional<double> energy_coverage;
};

int cmd_filter(const FilterArgs& a) {
  const int given = static_cast<int>(a.top_count.has_value()) +
                    static_cast<int>(a.top_fraction.has_value()) +
                    static_cast<int>(a.energy_coverage.has_value());
  if (given != 1) {
    throw UsageError("give exactly one of --top-count, --top-fraction, --energy-coverage");
  }
  FilterPolicy policy;
  try {
    policy = a.top_count        ? FilterPolicy::top_count(*a.top_count)
             : a.top_fraction   ? FilterPolicy::top_fraction(*a.top_fraction)
                                : FilterPolicy::energy_coverage(*a.energy_coverage);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  require_file(a.input, "input");
  const PathSet paths = read_paths(a.input);
  if (a.top_count && *a.top_count == 0) {
    std::fprintf(stderr, "warning: --top-count 0 keeps no paths\n");
  }
  const PathSet kept = filter_paths(paths, policy);
  write_paths(kept, a.output);

  const double total = paths.total_energy();
  std::printf("retained  %zu of %zu paths\n", kept.size(), paths.size());
  if (total > 0.0) {
    std::printf("energy    %.6f of total\n", kept.total_energy() / total);
  } else {
    std::printf("energy    n/a (input carries no energy)\n");
  }
  return 0;
}

struct AuralizeArgs {
  std::string input;
  std::string output;
  int order = 1;
  double sample_rate = kDefaultSampleRate;
  std::uint64_t seed = 0;
  std::optional<std::uint32_t> workers;
};

int cmd_auralize(const AuralizeArgs& a) {
  if (a.order < 0 || a.order > kMaxShOrder) {
    throw UsageError("--order must be in [0, " + std::to_string(kMaxShOrder) + "]");
  }
  require_file(a.input, "input");
  const PathSet paths = read_paths(a.input);
  BandConfig bands;
  if (!paths.metadata().band_centers_hz.empty()) bands.centers_hz = paths.metadata().band_centers_hz;
  bands.sample_rate = a.sample_rate;
  bands.noise_seed = a.seed;
  const AmbisonicIR ir = synthesize_ir(paths, a.order, bands, a.workers ? *a.workers : default_workers());
  write_wav(ir, a.output);

  std::printf("channels  %zu (%s)\n", ir.channels(), AmbisonicIR::kConvention);
  std::printf("length    %zu samples (%.3f s at %g Hz)\n", ir.length,
              static_cast<double>(ir.length) / ir.sample_rate, ir.sample_rate);
  const auto energy = channel_energy(ir);
  for (std::size_t c = 0; c < energy.size(); ++c) std::printf("energy[%zu] %.9g\n", c, energy[c]);
  return 0;
}

struct BenchArgs {
  std::string experiment;
  std::string output;
  std::string scene;
  int reps = 3;
  std::optional<std::uint32_t> workers;
  std::uint64_t seed = 0;
  double ray_scale = 1.0;
  std::size_t stride = 1;
  bool quiet = false;
};

int cmd_bench(const BenchArgs& a) {
  BenchOptions o;
  o.repetitions = a.reps;
  o.workers = a.workers ? *a.workers : 1;
  o.seed = a.seed;
  o.ray_scale = a.ray_scale;
  o.point_stride = a.stride;
  if (!a.scene.empty()) {
    require_file(a.scene, "scene");
    o.scene_json = slurp(a.scene);
  }
  if (o.workers > 1) std::fprintf(stderr, "note: multi-worker timings are not comparable to single-worker runs\n");
  if (!a.quiet) {
    o.progress = [](const BenchRow& r) {
      std::fprintf(stderr, "%s x=%g paths=%g time=%.4f s\n", r.group.c_str(), r.x, mean(r.paths),
                   mean(r.time_s));
    };
  }
  const auto t0 = std::chrono::steady_clock::now();
  const BenchReport report = run_bench(a.experiment, o);
  if (a.output.empty() || a.output == "-") {
    write_bench_csv(report, std::cout);
  } else {
    std::ofstream out(a.output);
    if (!out) throw IoError("cannot write " + a.output);
    write_bench_csv(report, out);
    if (!out) throw IoError("write failed: " + a.output);
  }
  std::fprintf(stderr, "%s: %zu samples x %d repetitions in %.1f s\n", report.experiment.c_str(),
               report.rows.size(), report.repetitions, seconds_since(t0));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"roomsir: room acoustics ray tracing, path storage and ambisonic auralization"};
  app.require_subcommand(1);

  TraceArgs ta;
  auto* trace_cmd = app.add_subcommand("trace", "trace paths through a scene and write a path file");
  trace_cmd->add_option("scene", ta.scene, "scene JSON")->required();
  trace_cmd->add_option("-c,--config", ta.config, "tracer configuration JSON");
  trace_cmd->add_option("-o,--output", ta.output, "output path file (.parquet)")->required();
  trace_cmd->add_option("--seed", ta.seed, "RNG seed (overrides the config)");
  trace_cmd->add_option("--workers", ta.workers, "tracing threads (default $ROOMSIR_WORKERS or 1)")
      ->check(CLI::Range(1u, 1024u));
  trace_cmd->add_option("--bands", ta.bands, "comma-separated band centers in Hz");
  trace_cmd->add_option("--set", ta.set, "scene override key=value (scale, absorption, ...)");

  FilterArgs fa;
  auto* filter_cmd = app.add_subcommand("filter", "keep the highest-energy paths");
  filter_cmd->add_option("input", fa.input, "input path file")->required();
  filter_cmd->add_option("-o,--output", fa.output, "output path file")->required();
  filter_cmd->add_option("--top-count", fa.top_count, "keep the N strongest paths");
  filter_cmd->add_option("--top-fraction", fa.top_fraction, "keep this fraction of paths");
  filter_cmd->add_option("--energy-coverage", fa.energy_coverage,
                         "keep the fewest paths holding this fraction of energy");

  AuralizeArgs aa;
  auto* aur_cmd = app.add_subcommand("auralize", "synthesize an ambisonic impulse response");
  aur_cmd->add_option("input", aa.input, "input path file")->required();
  aur_cmd->add_option("-o,--output", aa.output, "output WAV")->required();
  aur_cmd->add_option("--order", aa.order, "ambisonic order 0..9")->capture_default_str();
  aur_cmd->add_option("--sample-rate", aa.sample_rate, "Hz")->capture_default_str();
  aur_cmd->add_option("--seed", aa.seed, "noise seed")->capture_default_str();
  aur_cmd->add_option("--workers", aa.workers, "synthesis threads")->check(CLI::Range(1u, 1024u));

  BenchArgs ba;
  auto* bench_cmd = app.add_subcommand("bench", "run a benchmark sweep and write CSV");
  bench_cmd->add_option("experiment", ba.experiment, "room-size | ray-count | energy | storage")
      ->required()
      ->check(CLI::IsMember({"room-size", "ray-count", "energy", "storage"}));
  bench_cmd->add_option("-o,--output", ba.output, "CSV file (default stdout)");
  bench_cmd->add_option("--scene", ba.scene, "scene JSON (default: built-in reference room)");
  bench_cmd->add_option("--reps", ba.reps, "repetitions per sample")
      ->capture_default_str()
      ->check(CLI::Range(1, 1000));
  bench_cmd->add_option("--workers", ba.workers, "tracing threads (default 1)")
      ->check(CLI::Range(1u, 1024u));
  bench_cmd->add_option("--seed", ba.seed, "base seed; repetition r uses seed + r")
      ->capture_default_str();
  bench_cmd->add_option("--ray-scale", ba.ray_scale, "multiply every ray count (smoke runs)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--stride", ba.stride, "keep every k-th sweep point (smoke runs)")
      ->capture_default_str()
      ->check(CLI::Range(std::size_t{1}, std::size_t{1000}));
  bench_cmd->add_flag("-q,--quiet", ba.quiet, "no per-sample progress");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*trace_cmd) return cmd_trace(ta);
    if (*filter_cmd) return cmd_filter(fa);
    if (*aur_cmd) return cmd_auralize(aa);
    if (*bench_cmd) return cmd_bench(ba);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "roomsir: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "roomsir: error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}
