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


#include <filesystem>
#include <set>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "roomsir/bench.hpp"
#include "roomsir/error.hpp"
#include "roomsir/scene_io.hpp"

using namespace roomsir;

namespace {

BenchOptions quick() {
  BenchOptions o;
  o.repetitions = 2;
  o.ray_scale = 0.02;
  o.point_stride = 10;
  o.scratch_dir = std::filesystem::temp_directory_path() / "roomsir_bench_test";
  return o;
}

}  // namespace

TEST_CASE("spearman matches reference values") {
  // Values computed with scipy.stats.spearmanr.
  CHECK(spearman({1, 2, 3, 4, 5}, {5, 6, 7, 8, 7}) == doctest::Approx(0.8207826816681233).epsilon(1e-14));
  CHECK(spearman({1, 2, 2, 3, 10, 4}, {3, 1, 1, 9, 0, 2}) ==
        doctest::Approx(-0.35294117647058826).epsilon(1e-14));
  CHECK(spearman({1, 2, 3}, {30, 20, 10}) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(spearman({1}, {2}), Error);
}

TEST_CASE("line fit") {
  const std::vector<double> x{1, 2, 3, 4, 5, 6};
  const std::vector<double> y{2.1, 3.9, 6.2, 7.8, 10.1, 12.2};
  const LineFit f = fit_line(x, y);
  CHECK(f.r2 == doctest::Approx(oracle::r_squared(x, y)).epsilon(1e-12));
  const LineFit exact = fit_line({0, 1, 2}, {1, 3, 5});
  CHECK(exact.slope == doctest::Approx(2.0));
  CHECK(exact.intercept == doctest::Approx(1.0));
  CHECK(exact.r2 == doctest::Approx(1.0));
  CHECK(sample_sd({2, 4, 4, 4, 5, 5, 7, 9}) == doctest::Approx(2.138089935299395));
  CHECK(sample_sd({3}) == 0.0);
}

TEST_CASE("reference room document parses") {
  const Scene s = parse_scene(reference_scene_json());
  CHECK(s.shoebox_dims()->lx == 10.0);
  CHECK(s.band_count() == 8);
}

TEST_CASE("room-size smoke run and csv roundtrip") {
  const BenchReport r = run_bench("room-size", quick());
  REQUIRE(r.rows.size() == 10);
  CHECK(r.rows.front().x == doctest::Approx(0.1));
  CHECK(r.rows.back().x == doctest::Approx(9.1));
  for (const auto& row : r.rows) {
    CHECK(row.time_s.size() == 2);
    for (double t : row.time_s) CHECK(t > 0.0);
    CHECK(row.total_rays == 440);
  }
  // Same seed per repetition index: path counts repeat across reports.
  const BenchReport again = run_bench("room-size", quick());
  for (std::size_t i = 0; i < r.rows.size(); ++i) CHECK(r.rows[i].paths == again.rows[i].paths);

  std::stringstream csv;
  write_bench_csv(r, csv);
  const BenchReport back = read_bench_csv(csv);
  CHECK(back.experiment == "room-size");
  CHECK(back.repetitions == 2);
  REQUIRE(back.rows.size() == r.rows.size());
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    CHECK(back.rows[i].x == r.rows[i].x);
    CHECK(back.rows[i].time_s == r.rows[i].time_s);
    CHECK(back.rows[i].paths == r.rows[i].paths);
    CHECK(back.rows[i].energy == r.rows[i].energy);
  }
}

TEST_CASE("ray-count groups and ray totals") {
  const BenchReport r = run_bench("ray-count", quick());
  for (const char* g : {"spec10", "spec20", "spec30"}) {
    const auto rows = r.group(g);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0]->x == 100.0);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i]->x > rows[i - 1]->x);
  }
  CHECK(r.group("spec30")[0]->total_rays == 130);
}

TEST_CASE("energy curve is monotone and ends at one") {
  BenchOptions o = quick();
  o.ray_scale = 0.05;
  o.point_stride = 1;
  const BenchReport r = run_bench("energy", o);
  REQUIRE(r.rows.size() > 100);
  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    CHECK(r.rows[i].x > r.rows[i - 1].x);
    for (std::size_t k = 0; k < 2; ++k) CHECK(r.rows[i].energy[k] >= r.rows[i - 1].energy[k]);
  }
  CHECK(r.rows.back().x == 1.0);
  CHECK(r.rows.back().energy[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("storage sweep writes growing files") {
  BenchOptions o = quick();
  o.point_stride = 1;
  const BenchReport r = run_bench("storage", o);
  REQUIRE(r.rows.size() == 7);
  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    CHECK(r.rows[i].paths[0] >= r.rows[i - 1].paths[0]);
    CHECK(r.rows[i].bytes[0] >= r.rows[i - 1].bytes[0]);
  }
  CHECK(r.rows.back().bytes[0] == r.rows.back().bytes[1]);
  std::filesystem::remove_all(o.scratch_dir);
}

TEST_CASE("bench argument and csv errors") {
  CHECK_THROWS_AS(run_bench("latency"), ConfigError);
  BenchOptions o;
  o.repetitions = 0;
  CHECK_THROWS_AS(run_bench("room-size", o), ConfigError);

  std::istringstream bad_header("experiment,group\n");
  CHECK_THROWS_AS(read_bench_csv(bad_header), SchemaError);

  BenchReport r{"storage", 2, {{"fraction", 0.5, 10, {1.0, 2.0}, {5, 5}, {100, 100}, {1, 1}}}};
  std::stringstream csv;
  write_bench_csv(r, csv);
  std::string text = csv.str();
  // Corrupt the time mean (1.5) so it no longer matches the raw list.
  text.replace(text.find(",1.5,"), 5, ",1.75,");
  std::istringstream tampered(text);
  CHECK_THROWS_WITH_AS(read_bench_csv(tampered), doctest::Contains("inconsistent"), SchemaError);
}
