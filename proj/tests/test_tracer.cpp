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


#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "roomsir/error.hpp"
#include "roomsir/tracer.hpp"
#include "scenes.hpp"

using namespace roomsir;

namespace {

SimConfig small_config() {
  SimConfig c;
  c.n_diffuse = 2000;
  c.n_specular = 500;
  c.max_specular_depth = 3;
  c.max_diffuse_depth = 16;
  c.rng_seed = 7;
  return c;
}

std::vector<PathRecord> of_type(const std::vector<PathRecord>& all, PathType t) {
  std::vector<PathRecord> out;
  for (const auto& r : all) {
    if (r.type == t) out.push_back(r);
  }
  return out;
}

}  // namespace

TEST_CASE("direct path in the reference room") {
  const Scene s = test::reference_scene();
  SimConfig c = small_config();
  c.n_diffuse = 0;
  c.n_specular = 0;
  const auto paths = trace_records(s, c);
  REQUIRE(paths.size() == 1);
  const PathRecord& d = paths[0];
  CHECK(d.type == PathType::kDirect);
  CHECK(std::abs(d.distance - std::sqrt(20.0)) < 1e-12);
  const double expected = 1.0 / (4.0 * std::numbers::pi * 20.0);
  for (double e : d.intensities) CHECK(e == doctest::Approx(expected).epsilon(1e-12));
  CHECK((d.listener_direction - Vec3{4, 2, 0}.normalized()).norm() < 1e-12);
  CHECK((d.source_direction + d.listener_direction).norm() < 1e-12);
}

TEST_CASE("zero rays yields only the direct path, or nothing when it is blocked") {
  SimConfig c = small_config();
  c.n_diffuse = 0;
  c.n_specular = 0;
  CHECK(trace(test::reference_scene(), c).size() == 1);
  CHECK(trace(test::reference_scene_with_screen(test::Screen::kFull), c).size() == 0);
}

TEST_CASE("pure specular shoebox at depth one has six first-order paths") {
  const Scene s = test::reference_scene(0.3, 0.0);
  SimConfig c = small_config();
  c.n_diffuse = 0;
  c.max_specular_depth = 1;
  const auto paths = trace_records(s, c);
  CHECK(paths.size() == 7);
  const auto spec = of_type(paths, PathType::kSpecular);
  REQUIRE(spec.size() == 6);
  std::set<SurfaceId> walls;
  for (const auto& p : spec) {
    REQUIRE(p.surface_sequence.size() == 1);
    walls.insert(p.surface_sequence[0]);
  }
  CHECK(walls.size() == 6);
}

TEST_CASE("floor reflection matches its image source") {
  const Scene s = test::reference_scene();
  const std::array<SurfaceId, 1> floor{4};
  const auto r = validate_specular(s, floor);
  REQUIRE(r);
  CHECK(std::abs(r->distance - std::sqrt(21.0)) < 1e-12);
  const double expected = 0.7 * 0.9 / (4.0 * std::numbers::pi * 21.0);
  CHECK(expected == doctest::Approx(2.387e-3).epsilon(1e-3));
  for (double e : r->intensities) CHECK(e == doctest::Approx(expected).epsilon(1e-12));
  // Leaves the listener downward, arrives at the source from below.
  CHECK(r->listener_direction.z < 0.0);
  CHECK(r->source_direction.z < 0.0);

  const std::array<SurfaceId, 2> twice{4, 4};
  CHECK_FALSE(validate_specular(s, twice));
  const std::array<SurfaceId, 1> missing{42};
  CHECK_FALSE(validate_specular(s, missing));
}

TEST_CASE("exhaustive specular paths equal the lattice image set") {
  const Scene s = test::reference_scene(0.3, 0.0);
  for (std::uint32_t depth : {1u, 2u, 3u, 5u}) {
    SimConfig c = small_config();
    c.n_diffuse = 0;
    c.max_specular_depth = depth;
    c.specular_discovery = SpecularDiscovery::kExhaustive;
    const auto spec = of_type(trace_records(s, c), PathType::kSpecular);
    const auto images =
        oracle::lattice_images(*s.shoebox_dims(), s.listener(), s.source(), static_cast<int>(depth));
    std::map<std::vector<SurfaceId>, double> expected;
    for (const auto& img : images) expected[img.sequence] = img.distance;
    REQUIRE(spec.size() == expected.size());
    for (const auto& p : spec) {
      const auto it = expected.find(p.surface_sequence);
      REQUIRE(it != expected.end());
      CHECK(std::abs(p.distance - it->second) < 1e-6);
      const double bound = 1.0 / (4.0 * std::numbers::pi * p.distance * p.distance);
      const double gain = std::pow(0.7, static_cast<double>(p.surface_sequence.size()));
      CHECK(p.intensities[0] == doctest::Approx(bound * gain).epsilon(1e-9));
    }
  }
}

TEST_CASE("stochastic discovery finds a subset of the exhaustive set") {
  const Scene s = test::reference_scene();
  SimConfig c = small_config();
  c.n_diffuse = 0;
  c.n_specular = 20000;
  c.max_specular_depth = 4;
  c.specular_discovery = SpecularDiscovery::kExhaustive;
  const auto all = of_type(trace_records(s, c), PathType::kSpecular);
  c.specular_discovery = SpecularDiscovery::kStochastic;
  const auto found = of_type(trace_records(s, c), PathType::kSpecular);
  std::map<std::vector<SurfaceId>, double> index;
  for (const auto& p : all) index[p.surface_sequence] = p.distance;
  std::set<std::vector<SurfaceId>> unique;
  for (const auto& p : found) {
    CHECK(unique.insert(p.surface_sequence).second);
    const auto it = index.find(p.surface_sequence);
    REQUIRE(it != index.end());
    CHECK(p.distance == it->second);
  }
  CHECK(found.size() > all.size() / 2);
}

TEST_CASE("direct visibility") {
  SimConfig c = small_config();
  c.visibility_samples = 10000;
  CHECK(direct_visibility(test::reference_scene(), c) == 1.0);
  CHECK(direct_visibility(test::reference_scene_with_screen(test::Screen::kFull), c) == 0.0);
  const double half = direct_visibility(test::reference_scene_with_screen(test::Screen::kUpperHalf), c);
  CHECK(std::abs(half - 0.5) <= 0.02);

  // Blocked halfway: the direct path carries half the free-field energy.
  c.n_diffuse = 0;
  c.n_specular = 0;
  const auto paths = trace_records(test::reference_scene_with_screen(test::Screen::kUpperHalf), c);
  REQUIRE(paths.size() == 1);
  CHECK(paths[0].intensities[0] ==
        doctest::Approx(half / (4.0 * std::numbers::pi * 20.0)).epsilon(1e-12));

  c.visibility_samples = 0;
  CHECK_THROWS_AS(direct_visibility(test::reference_scene(), c), ConfigError);
}

TEST_CASE("path set invariants") {
  const Scene s = test::reference_scene();
  const auto paths = trace_records(s, small_config());
  const double direct = std::sqrt(20.0);
  std::size_t directs = 0;
  std::set<std::vector<SurfaceId>> sequences;
  std::size_t last_order = 0;
  for (const auto& p : paths) {
    REQUIRE(p.intensities.size() == s.band_count());
    for (double e : p.intensities) {
      CHECK(std::isfinite(e));
      CHECK(e >= 0.0);
    }
    CHECK(std::abs(p.listener_direction.norm() - 1.0) < 1e-9);
    CHECK(std::abs(p.source_direction.norm() - 1.0) < 1e-9);
    CHECK(p.relative_speed == 0.0);
    switch (p.type) {
      case PathType::kDirect:
        ++directs;
        break;
      case PathType::kSpecular:
        CHECK(p.distance > direct);
        CHECK(p.surface_sequence.size() >= last_order);
        last_order = p.surface_sequence.size();
        CHECK(sequences.insert(p.surface_sequence).second);
        CHECK(p.total_energy() < 8.0 / (4.0 * std::numbers::pi * p.distance * p.distance));
        break;
      case PathType::kDiffuse:
        // Registered at the sphere surface, so no shorter than d - r.
        CHECK(p.distance >= direct - s.source_radius() - 1e-9);
        break;
      default:
        FAIL("unexpected path type");
    }
  }
  CHECK(directs == 1);
  CHECK(of_type(paths, PathType::kDiffuse).size() > 0);
}

TEST_CASE("tracing is deterministic across runs and worker counts") {
  const Scene s = test::reference_scene();
  SimConfig c = small_config();
  const PathSet a = trace(s, c);
  const PathSet b = trace(s, c);
  CHECK(a.identical(b));
  c.workers = 4;
  CHECK(a.identical(trace(s, c)));
  c.workers = 3;
  c.specular_discovery = SpecularDiscovery::kStochastic;
  SimConfig one = c;
  one.workers = 1;
  CHECK(trace(s, one).identical(trace(s, c)));

  c.rng_seed = 8;
  c.workers = 1;
  CHECK_FALSE(a.identical(trace(s, c)));
}

TEST_CASE("diffuse sphere hits reproduce the direct-path energy in an absorbing room") {
  const Scene s =
      Scene::shoebox({10, 4, 4}, {test::uniform_material(1.0, 0.0)}, [] {
        SceneParams p = test::reference_params();
        p.source_radius = 0.5;
        return p;
      }());
  SimConfig c;
  c.n_diffuse = 400000;
  c.n_specular = 0;
  c.min_diffuse_bounces = 0;
  c.rng_seed = 1;
  double total = 0.0;
  for (const auto& p : trace_records(s, c)) {
    if (p.type == PathType::kDiffuse) total += p.intensities[0];
  }
  const double expected = 1.0 / (4.0 * std::numbers::pi * 20.0);
  CHECK(std::abs(total / expected - 1.0) < 0.1);
}

TEST_CASE("air absorption attenuates by exp(-a d)") {
  SceneParams p = test::reference_params();
  p.air_absorption = std::vector<double>(8, 0.01);
  p.air_absorption[7] = 0.05;
  const Scene s = Scene::shoebox({10, 4, 4}, {test::uniform_material(0.3, 0.1)}, p);
  SimConfig c = small_config();
  c.n_diffuse = 0;
  c.n_specular = 0;
  const auto d = trace_records(s, c).at(0);
  const double free_field = 1.0 / (4.0 * std::numbers::pi * 20.0);
  CHECK(d.intensities[0] == doctest::Approx(free_field * std::exp(-0.01 * d.distance)));
  CHECK(d.intensities[7] == doctest::Approx(free_field * std::exp(-0.05 * d.distance)));
}

TEST_CASE("simulation config parsing") {
  const SimConfig c = parse_sim_config(
      R"({"n_diffuse": 10, "n_specular": 5, "max_specular_depth": 2, "seed": 99,
          "specular_discovery": "stochastic", "workers": 3})");
  CHECK(c.n_diffuse == 10);
  CHECK(c.n_specular == 5);
  CHECK(c.max_specular_depth == 2);
  CHECK(c.rng_seed == 99);
  CHECK(c.specular_discovery == SpecularDiscovery::kStochastic);
  CHECK(c.workers == 3);
  // Worker count is an execution detail and stays out of the provenance echo.
  CHECK(to_json(c).find("workers") == std::string::npos);
  CHECK(to_json(c).find("\"seed\":99") != std::string::npos);

  CHECK_THROWS_AS(parse_sim_config(R"({"rays": 10})"), ConfigError);
  CHECK_THROWS_AS(parse_sim_config(R"({"max_diffuse_depth": 0})"), ConfigError);
  CHECK_THROWS_AS(parse_sim_config(R"({"specular_discovery": "guess"})"), ConfigError);
  CHECK_THROWS_AS(parse_sim_config(R"({"n_diffuse": -1})"), ConfigError);
  CHECK_THROWS_AS(parse_sim_config("not json"), ConfigError);
}

TEST_CASE("coincident listener and source is rejected") {
  SceneParams p = test::reference_params();
  p.source = p.listener;
  const Scene s = Scene::shoebox({10, 4, 4}, {test::uniform_material(0.3, 0.1)}, p);
  CHECK_THROWS_AS(trace(s, small_config()), SceneError);
}
