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
#include <fstream>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "roomsir/error.hpp"
#include "roomsir/geometry.hpp"
#include "roomsir/scene_io.hpp"
#include "scenes.hpp"

using namespace roomsir;

namespace {

Vec3 random_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  return Vec3{g(rng), g(rng), g(rng)}.normalized();
}

Vec3 random_interior(std::mt19937_64& rng, const ShoeboxDims& dims) {
  std::uniform_real_distribution<double> u(0.01, 0.99);
  return {u(rng) * dims.lx, u(rng) * dims.ly, u(rng) * dims.lz};
}

const char* kReferenceScene = R"({
  "shoebox": {"lx": 10, "ly": 4, "lz": 4},
  "materials": {"wall": {"absorption": [0.3,0.3,0.3,0.3,0.3,0.3,0.3,0.3], "scattering": 0.1}},
  "surface_materials": "wall",
  "source": {"position": [5, 3, 0.5], "radius": 0.25},
  "listener": {"position": [1, 1, 0.5]}
})";

}  // namespace

TEST_CASE("load_scene expands the reference shoebox") {
  const Scene s = parse_scene(kReferenceScene);
  CHECK(s.surfaces().size() == 12);
  CHECK(s.materials().size() == 1);
  CHECK(s.surface_ids().size() == 6);
  CHECK(s.band_count() == 8);
  CHECK(s.speed_of_sound() == 343.0);
  REQUIRE(s.shoebox_dims().has_value());
  for (const auto& surf : s.surfaces()) {
    // Normals face the room interior: the room center is on the positive side.
    const Vec3 center{5, 2, 2};
    CHECK(dot(center - surf.vertices[0], surf.normal) > 0.0);
    CHECK(surf.area() > 1.0);
  }
}

TEST_CASE("load_scene rejects degenerate or out-of-range input") {
  SUBCASE("zero width") {
    const std::string doc = std::string(kReferenceScene).replace(std::string(kReferenceScene).find("\"ly\": 4"), 7, "\"ly\": 0");
    CHECK_THROWS_WITH_AS(parse_scene(doc), doctest::Contains("degenerate dimension"), SceneError);
  }
  SUBCASE("absorption above one") {
    CHECK_THROWS_AS(parse_scene(kReferenceScene, {{"absorption", "1.5"}}), SceneError);
  }
  SUBCASE("scattering below zero") {
    CHECK_THROWS_AS(parse_scene(kReferenceScene, {{"scattering", "-0.1"}}), SceneError);
  }
  SUBCASE("listener outside") {
    std::string doc = kReferenceScene;
    doc.replace(doc.find("[1, 1, 0.5]"), 11, "[11, 1, 0.5]");
    CHECK_THROWS_WITH_AS(parse_scene(doc), doctest::Contains("listener outside"), SceneError);
  }
  SUBCASE("malformed json") {
    CHECK_THROWS_WITH_AS(parse_scene("{\"shoebox\": "), doctest::Contains("parse error"), SceneError);
  }
  SUBCASE("unknown override") {
    CHECK_THROWS_AS(parse_scene(kReferenceScene, {{"colour", "red"}}), ConfigError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_WITH_AS(load_scene("/nonexistent/scene.json"), doctest::Contains("scene not found"),
                         IoError);
  }
}

TEST_CASE("scale override multiplies geometry and placements only") {
  const Scene base = parse_scene(kReferenceScene);
  const Scene twice = parse_scene(kReferenceScene, {{"scale", "2.0"}});
  REQUIRE(base.surfaces().size() == twice.surfaces().size());
  for (std::size_t i = 0; i < base.surfaces().size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      CHECK(twice.surfaces()[i].vertices[k] == base.surfaces()[i].vertices[k] * 2.0);
    }
  }
  CHECK(twice.source() == base.source() * 2.0);
  CHECK(twice.listener() == base.listener() * 2.0);
  CHECK(twice.source_radius() == base.source_radius());
  CHECK(twice.materials()[0].absorption == base.materials()[0].absorption);
  CHECK(twice.materials()[0].scattering == base.materials()[0].scattering);
}

TEST_CASE("bands override replaces band centers") {
  const char* doc = R"({
    "shoebox": {"lx": 10, "ly": 4, "lz": 4},
    "materials": {"wall": {"absorption": 0.3, "scattering": 0.1}},
    "surface_materials": "wall",
    "source": {"position": [5, 3, 0.5]},
    "listener": {"position": [1, 1, 0.5]}
  })";
  const Scene s = parse_scene(doc, {{"bands", "250,1000,4000"}});
  CHECK(s.band_count() == 3);
  CHECK(s.band_centers()[1] == 1000.0);
  CHECK(s.materials()[0].absorption.size() == 3);
  CHECK_THROWS_AS(parse_scene(doc, {{"bands", "250,x"}}), ConfigError);
  // Per-band absorption of length 8 cannot be matched to 3 bands.
  CHECK_THROWS_AS(parse_scene(kReferenceScene, {{"bands", "250,1000,4000"}}), SceneError);
}

TEST_CASE("ray_intersect hits floor and ceiling at analytic distances") {
  const Scene s = test::reference_scene();
  const auto floor = ray_intersect(s, {1, 1, 0.5}, {0, 0, -1});
  REQUIRE(floor);
  CHECK(floor->surface_id == 4);
  CHECK(floor->distance == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(floor->point.z == doctest::Approx(0.0).epsilon(1e-12));

  const auto ceiling = ray_intersect(s, {1, 1, 0.5}, {0, 0, 1});
  REQUIRE(ceiling);
  CHECK(ceiling->surface_id == 5);
  CHECK(ceiling->distance == doctest::Approx(3.5).epsilon(1e-12));
}

TEST_CASE("ray leaving a surface tangentially does not hit it") {
  const Scene s = test::reference_scene();
  const auto hit = ray_intersect(s, {3, 2, 0}, {1, 0, 0}, 1e-4);
  REQUIRE(hit);
  CHECK(hit->surface_id != 4);
  CHECK(hit->surface_id == 1);
  CHECK(hit->distance == doctest::Approx(7.0));
}

TEST_CASE("segment_occluded") {
  const Scene s = test::reference_scene();
  CHECK_FALSE(segment_occluded(s, {1, 1, 0.5}, {5, 3, 0.5}));

  const Scene walled = test::reference_scene_with_screen(test::Screen::kFull);
  CHECK(segment_occluded(walled, {1, 1, 0.5}, {5, 3, 0.5}));

  // Endpoint on the floor: the eps trim and the ignore list both apply.
  const std::array<SurfaceId, 1> floor{4};
  CHECK_FALSE(segment_occluded(s, {1, 1, 0.5}, {3, 2, 0.0}, 1e-4, floor));
  CHECK_FALSE(segment_occluded(s, {1, 1, 0.5}, {3, 2, 0.0}, 1e-4));
}

TEST_CASE("accelerated intersection equals brute force on random rays") {
  const Scene s = test::reference_scene();
  const ShoeboxDims dims = *s.shoebox_dims();
  std::mt19937_64 rng(42);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 o = random_interior(rng, dims);
    const Vec3 d = random_direction(rng);
    const auto fast = ray_intersect(s, o, d, 1e-4);
    const auto slow = oracle::brute_force_intersect(s.surfaces(), o, d, 1e-4);
    REQUIRE(fast.has_value() == slow.has_value());
    // Watertight: every interior ray must leave through a wall.
    REQUIRE(fast);
    CHECK(fast->surface_id == slow->id);
    CHECK(std::abs(fast->distance - slow->distance) < 1e-9);
  }
}

TEST_CASE("BVH on a triangle soup matches brute force and respects leaf size") {
  const Scene s = test::triangle_soup_scene(400, 7);
  CHECK(s.bvh().max_leaf_size() <= Bvh::kMaxLeafSize);
  CHECK(s.bvh().node_count() > 100);
  std::mt19937_64 rng(3);
  int hits = 0;
  for (int i = 0; i < 2000; ++i) {
    const Vec3 o = random_interior(rng, {10, 10, 10});
    const Vec3 d = random_direction(rng);
    const auto fast = ray_intersect(s, o, d, 1e-4);
    const auto slow = oracle::brute_force_intersect(s.surfaces(), o, d, 1e-4);
    REQUIRE(fast.has_value() == slow.has_value());
    if (!fast) continue;
    ++hits;
    CHECK(fast->triangle == slow->triangle);
    CHECK(std::abs(fast->distance - slow->distance) < 1e-9);
  }
  CHECK(hits > 100);
}

TEST_CASE("re-casting from a hit offset along the normal never re-hits the surface within eps") {
  const Scene s = test::reference_scene();
  std::mt19937_64 rng(11);
  const double eps = 1e-4;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 o = random_interior(rng, *s.shoebox_dims());
    const auto hit = ray_intersect(s, o, random_direction(rng), eps);
    REQUIRE(hit);
    const Vec3 start = hit->point + hit->normal * eps;
    const auto again = ray_intersect(s, start, random_direction(rng), eps);
    REQUIRE(again);
    if (again->surface_id == hit->surface_id) CHECK(again->distance >= eps);
  }
}

TEST_CASE("watertight from interior points in every direction") {
  const Scene s = test::reference_scene();
  std::mt19937_64 rng(5);
  for (int i = 0; i < 2000; ++i) {
    CHECK(ray_intersect(s, random_interior(rng, *s.shoebox_dims()), random_direction(rng)));
  }
}

TEST_CASE("OBJ mesh ingestion") {
  const auto dir = std::filesystem::temp_directory_path() / "roomsir_obj_test";
  std::filesystem::create_directories(dir);
  {
    // Unit-size cube with faces wound so normals point inward.
    std::ofstream obj(dir / "cube.obj");
    obj << "# cube\n"
           "v 0 0 0\nv 2 0 0\nv 2 2 0\nv 0 2 0\nv 0 0 2\nv 2 0 2\nv 2 2 2\nv 0 2 2\n"
           "o floor\nusemtl carpet\nf 1 2 3 4\n"
           "o walls\nusemtl plaster\n"
           "f 5 8 7 6\nf 1 5 6 2\nf 2 6 7 3\nf 3 7 8 4\nf 4 8 5 1\n";
    std::ofstream json(dir / "scene.json");
    json << R"({
      "mesh": "cube.obj",
      "materials": {"carpet": {"absorption": 0.6, "scattering": 0.5},
                    "plaster": {"absorption": 0.1, "scattering": 0.2}},
      "surface_materials": {"*": "plaster"},
      "source": {"position": [1.5, 1.5, 1]},
      "listener": {"position": [0.5, 0.5, 1]},
      "bands": [500, 1000]
    })";
  }
  const Scene s = load_scene(dir / "scene.json");
  CHECK(s.surfaces().size() == 12);
  CHECK(s.surface_ids().size() == 12);
  CHECK_FALSE(s.shoebox_dims().has_value());
  CHECK(s.band_count() == 2);
  int carpet = 0;
  for (const auto& surf : s.surfaces()) {
    CHECK(dot(Vec3{1, 1, 1} - surf.vertices[0], surf.normal) > 0.0);
    if (s.material_of(surf).name == "carpet") ++carpet;
  }
  CHECK(carpet == 2);
  const auto down = ray_intersect(s, {0.5, 0.5, 1}, {0, 0, -1});
  REQUIRE(down);
  CHECK(down->distance == doctest::Approx(1.0));

  CHECK_THROWS_AS(parse_obj("v 0 0 0\nf 1 2 3\n"), SceneError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("content hash tracks scene content") {
  const Scene a = test::reference_scene();
  const Scene b = test::reference_scene();
  CHECK(a.content_hash() == b.content_hash());
  CHECK(a.content_hash() != test::reference_scene(0.3, 0.2).content_hash());
}
