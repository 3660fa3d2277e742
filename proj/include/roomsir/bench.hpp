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


#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "roomsir/tracer.hpp"

namespace roomsir {

// The 10 x 4 x 4 m reference room used by every sweep unless a scene is given.
std::string_view reference_scene_json();

// One independent-variable sample of a sweep. Each raw vector holds one entry
// per repetition.
struct BenchRow {
  std::string group;
  double x = 0.0;
  std::uint64_t total_rays = 0;
  std::vector<double> time_s;
  std::vector<double> paths;
  std::vector<double> bytes;
  std::vector<double> energy;
};

struct BenchReport {
  std::string experiment;
  int repetitions = 0;
  std::vector<BenchRow> rows;

  // Rows of one group, in sweep order.
  std::vector<const BenchRow*> group(std::string_view name) const;
};

struct BenchOptions {
  int repetitions = 3;
  std::uint32_t workers = 1;
  std::uint64_t seed = 0;   // repetition r traces with seed + r
  std::string scene_json;   // empty: reference_scene_json()
  std::filesystem::path scratch_dir;  // storage experiment files; empty: temp dir
  // Multiplies every ray count and keeps every k-th sweep point. Both stay at
  // 1 for full-size runs; smaller settings give quick smoke runs.
  double ray_scale = 1.0;
  std::size_t point_stride = 1;
  std::function<void(const BenchRow&)> progress;
};

inline constexpr std::array<std::string_view, 4> kBenchExperiments{"room-size", "ray-count",
                                                                   "energy", "storage"};

// Tracer settings for the sweeps. Specular paths are found by ray casting so
// the specular ray count is a real cost; `full_scale` raises the diffuse
// depth cap for the energy and storage runs.
SimConfig bench_sim_config(bool full_scale);

// room-size: scale 0.1..10 step 0.1, 20k diffuse + 2k specular rays.
//   x = scale, paths = valid paths.
// ray-count: diffuse 5k..80k in 30 steps, groups spec10/spec20/spec30 with
//   that percentage of specular rays. x = diffuse rays.
// energy: 80k diffuse + 24k specular. x = fraction of top-ranked paths,
//   energy = share of total energy they carry.
// storage: one 80k + 24k trace written at stored fractions 1..100 %.
//   x = fraction, paths = rows, bytes = file size, time_s = write time.
//   Every file is read back and compared bit for bit.
// Throws ConfigError for an unknown experiment.
BenchReport run_bench(std::string_view experiment, const BenchOptions& options = {});

// CSV with a header row. Means and sample standard deviations are derived
// from the raw repetition lists, which are written ';'-joined.
void write_bench_csv(const BenchReport& report, std::ostream& out);
BenchReport read_bench_csv(std::istream& in);

// Summary statistics used on bench output.
double mean(const std::vector<double>& v);
double sample_sd(const std::vector<double>& v);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace roomsir
