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


#include "roomsir/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "roomsir/error.hpp"
#include "roomsir/pathstore.hpp"
#include "roomsir/scene_io.hpp"

namespace roomsir {

std::string_view reference_scene_json() {
  return R"({
  "shoebox": {"lx": 10, "ly": 4, "lz": 4},
  "materials": {"wall": {"absorption": 0.3, "scattering": 0.1}},
  "surface_materials": "wall",
  "source": {"position": [5, 3, 0.5], "radius": 0.25},
  "listener": {"position": [1, 1, 0.5]}
})";
}

std::vector<const BenchRow*> BenchReport::group(std::string_view name) const {
  std::vector<const BenchRow*> out;
  for (const auto& r : rows) {
    if (r.group == name) out.push_back(&r);
  }
  return out;
}

SimConfig bench_sim_config(bool full_scale) {
  SimConfig c;
  c.specular_discovery = SpecularDiscovery::kStochastic;
  if (full_scale) c.max_diffuse_depth = 200;
  return c;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::uint64_t scaled(std::uint64_t rays, const BenchOptions& o) {
  return static_cast<std::uint64_t>(std::llround(static_cast<double>(rays) * o.ray_scale));
}

class Runner {
 public:
  explicit Runner(const BenchOptions& o) : o_(o) {
    if (o.repetitions < 1) throw ConfigError("bench repetitions must be at least 1");
    if (o.point_stride < 1) throw ConfigError("bench point stride must be at least 1");
    if (!(o.ray_scale > 0.0)) throw ConfigError("bench ray scale must be positive");
    scene_json_ = o.scene_json.empty() ? std::string(reference_scene_json()) : o.scene_json;
  }

  Scene scene(const SceneOverrides& overrides = {}) const {
    return parse_scene(scene_json_, overrides);
  }

  SimConfig config(bool full_scale, std::uint64_t n_diffuse, std::uint64_t n_specular,
                   int rep) const {
    SimConfig c = bench_sim_config(full_scale);
    c.n_diffuse = scaled(n_diffuse, o_);
    c.n_specular = scaled(n_specular, o_);
    c.rng_seed = o_.seed + static_cast<std::uint64_t>(rep);
    c.workers = o_.workers;
    return c;
  }

  // Times trace() only; scene construction is excluded.
  void trace_into(BenchRow& row, const Scene& s, const SimConfig& c) const {
    const auto t0 = Clock::now();
    const PathSet p = trace(s, c);
    row.time_s.push_back(seconds_since(t0));
    row.paths.push_back(static_cast<double>(p.size()));
    row.bytes.push_back(0.0);
    row.energy.push_back(p.total_energy());
  }

  void emit(BenchReport& report, BenchRow row) const {
    if (o_.progress) o_.progress(row);
    report.rows.push_back(std::move(row));
  }

  bool keep(std::size_t i) const { return i % o_.point_stride == 0; }
  const BenchOptions& options() const { return o_; }

 private:
  const BenchOptions& o_;
  std::string scene_json_;
};

void room_size(const Runner& run, BenchReport& report) {
  for (int k = 1; k <= 100; ++k) {
    if (!run.keep(static_cast<std::size_t>(k - 1))) continue;
    const double scale = k / 10.0;
    std::ostringstream s;
    s.precision(17);
    s << scale;
    const Scene scene = run.scene({{"scale", s.str()}});
    BenchRow row{"scale", scale, 0, {}, {}, {}, {}};
    for (int r = 0; r < run.options().repetitions; ++r) {
      const SimConfig c = run.config(false, 20000, 2000, r);
      row.total_rays = c.n_diffuse + c.n_specular;
      run.trace_into(row, scene, c);
    }
    run.emit(report, std::move(row));
  }
}

void ray_count(const Runner& run, BenchReport& report) {
  const Scene scene = run.scene();
  for (int pct : {10, 20, 30}) {
    for (int i = 0; i < 30; ++i) {
      if (!run.keep(static_cast<std::size_t>(i))) continue;
      // 30 uniform steps from 5k to 80k inclusive.
      const std::uint64_t diffuse = 5000 + static_cast<std::uint64_t>(std::llround(75000.0 * i / 29));
      const std::uint64_t specular = diffuse * static_cast<std::uint64_t>(pct) / 100;
      BenchRow row{"spec" + std::to_string(pct), 0.0, 0, {}, {}, {}, {}};
      for (int r = 0; r < run.options().repetitions; ++r) {
        const SimConfig c = run.config(false, diffuse, specular, r);
        row.x = static_cast<double>(c.n_diffuse);
        row.total_rays = c.n_diffuse + c.n_specular;
        run.trace_into(row, scene, c);
      }
      run.emit(report, std::move(row));
    }
  }
}

std::vector<double> energy_grid() {
  std::vector<double> x;
  for (double decade : {1e-4, 1e-3, 1e-2, 1e-1}) {
    for (double m : {1.0, 2.0, 5.0}) x.push_back(decade * m);
  }
  for (int k = 1; k <= 100; ++k) x.push_back(k / 100.0);
  std::sort(x.begin(), x.end());
  x.erase(std::unique(x.begin(), x.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
          x.end());
  return x;
}

void energy(const Runner& run, BenchReport& report) {
  const Scene scene = run.scene();
  const auto grid = energy_grid();
  std::vector<BenchRow> rows;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (run.keep(i) || grid[i] == 1.0) rows.push_back({"curve", grid[i], 0, {}, {}, {}, {}});
  }
  for (int r = 0; r < run.options().repetitions; ++r) {
    const SimConfig c = run.config(true, 80000, 24000, r);
    const auto t0 = Clock::now();
    const PathSet p = trace(scene, c);
    const double t = seconds_since(t0);
    const auto curve = cumulative_energy_curve(p);
    for (auto& row : rows) {
      const auto k = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::ceil(row.x * static_cast<double>(p.size()) - 1e-9)));
      row.total_rays = c.n_diffuse + c.n_specular;
      row.time_s.push_back(t);
      row.paths.push_back(static_cast<double>(k));
      row.bytes.push_back(0.0);
      row.energy.push_back(curve[k - 1]);
    }
  }
  for (auto& row : rows) run.emit(report, std::move(row));
}

void storage(const Runner& run, BenchReport& report) {
  const Scene scene = run.scene();
  const PathSet full = trace(scene, run.config(true, 80000, 24000, 0));
  const auto dir = run.options().scratch_dir.empty() ? std::filesystem::temp_directory_path()
                                                     : run.options().scratch_dir;
  std::filesystem::create_directories(dir);
  const auto file = dir / ("roomsir_bench_storage_" + std::to_string(run.options().seed) + ".parquet");
  const std::array<double, 7> fractions{0.01, 0.02, 0.05, 0.10, 0.25, 0.50, 1.0};
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    if (!run.keep(i) && fractions[i] != 1.0) continue;
    const PathSet kept = filter_paths(full, FilterPolicy::top_fraction(fractions[i]));
    BenchRow row{"fraction", fractions[i], 0, {}, {}, {}, {}};
    for (int r = 0; r < run.options().repetitions; ++r) {
      const WriteStats st = write_paths(kept, file);
      if (!read_paths(file).identical(kept)) {
        throw Error("storage bench: read-back differs from written path set");
      }
      row.total_rays = full.size();
      row.time_s.push_back(st.seconds);
      row.paths.push_back(static_cast<double>(kept.size()));
      row.bytes.push_back(static_cast<double>(st.bytes));
      row.energy.push_back(kept.total_energy());
    }
    run.emit(report, std::move(row));
  }
  std::filesystem::remove(file);
}

std::string join(const std::vector<double>& v) {
  std::ostringstream s;
  s.precision(17);
  for (std::size_t i = 0; i < v.size(); ++i) s << (i ? ";" : "") << v[i];
  return s.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw SchemaError("bench csv: bad number '" + s + "'");
  return v;
}

std::vector<double> to_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split(s, ';')) out.push_back(to_double(item));
  return out;
}

constexpr std::array<std::string_view, 17> kCsvColumns{
    "experiment", "group",      "x",          "total_rays",  "repetitions", "time_mean_s",
    "time_sd_s",  "paths_mean", "paths_sd",   "bytes_mean",  "bytes_sd",    "energy_mean",
    "energy_sd",  "raw_time_s", "raw_paths",  "raw_bytes",   "raw_energy"};

}  // namespace

BenchReport run_bench(std::string_view experiment, const BenchOptions& options) {
  const Runner run(options);
  BenchReport report;
  report.experiment = std::string(experiment);
  report.repetitions = options.repetitions;
  if (experiment == "room-size") {
    room_size(run, report);
  } else if (experiment == "ray-count") {
    ray_count(run, report);
  } else if (experiment == "energy") {
    energy(run, report);
  } else if (experiment == "storage") {
    storage(run, report);
  } else {
    throw ConfigError("unknown bench experiment '" + std::string(experiment) +
                      "' (expected room-size, ray-count, energy or storage)");
  }
  return report;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

void write_bench_csv(const BenchReport& report, std::ostream& out) {
  for (std::size_t i = 0; i < kCsvColumns.size(); ++i) out << (i ? "," : "") << kCsvColumns[i];
  out << '\n';
  std::ostringstream line;
  line.precision(17);
  for (const auto& r : report.rows) {
    line.str("");
    line << report.experiment << ',' << r.group << ',' << r.x << ',' << r.total_rays << ','
         << report.repetitions << ',' << mean(r.time_s) << ',' << sample_sd(r.time_s) << ','
         << mean(r.paths) << ',' << sample_sd(r.paths) << ',' << mean(r.bytes) << ','
         << sample_sd(r.bytes) << ',' << mean(r.energy) << ',' << sample_sd(r.energy) << ','
         << join(r.time_s) << ',' << join(r.paths) << ',' << join(r.bytes) << ','
         << join(r.energy) << '\n';
    out << line.str();
  }
}

BenchReport read_bench_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("bench csv: missing header");
  const auto header = split(line, ',');
  if (header.size() != kCsvColumns.size() ||
      !std::equal(header.begin(), header.end(), kCsvColumns.begin())) {
    throw SchemaError("bench csv: unexpected header");
  }
  BenchReport report;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != kCsvColumns.size()) throw SchemaError("bench csv: wrong field count");
    if (report.experiment.empty()) {
      report.experiment = f[0];
      report.repetitions = static_cast<int>(to_double(f[4]));
    } else if (f[0] != report.experiment) {
      throw SchemaError("bench csv: mixed experiments");
    }
    BenchRow r{f[1], to_double(f[2]), static_cast<std::uint64_t>(to_double(f[3])),
               to_doubles(f[13]), to_doubles(f[14]), to_doubles(f[15]), to_doubles(f[16])};
    for (const auto* raw : {&r.time_s, &r.paths, &r.bytes, &r.energy}) {
      if (raw->size() != static_cast<std::size_t>(report.repetitions)) {
        throw SchemaError("bench csv: raw list length differs from repetitions");
      }
    }
    const std::array<std::pair<std::size_t, const std::vector<double>*>, 4> stats{
        {{5, &r.time_s}, {7, &r.paths}, {9, &r.bytes}, {11, &r.energy}}};
    for (const auto& [col, raw] : stats) {
      const double m = to_double(f[col]);
      const double sd = to_double(f[col + 1]);
      const double tol = 1e-9 * (1.0 + std::abs(m));
      if (std::abs(m - mean(*raw)) > tol || std::abs(sd - sample_sd(*raw)) > tol) {
        throw SchemaError("bench csv: " + std::string(kCsvColumns[col]) +
                          " inconsistent with raw values");
      }
    }
    report.rows.push_back(std::move(r));
  }
  return report;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error("line fit needs two or more points");
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error("line fit needs distinct x values");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0.0 ? 1.0 : sxy * sxy / (sxx * syy);
  return fit;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[idx[k]] = avg;
    i = j + 1;
  }
  return rank;
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error("rank correlation needs two or more points");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double mx = mean(rx), my = mean(ry);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace roomsir
