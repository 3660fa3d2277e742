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
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "roomsir/error.hpp"
#include "roomsir/hoa.hpp"

using namespace roomsir;

namespace {

std::vector<Vec3> random_directions(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<Vec3> out(n);
  for (auto& d : out) d = Vec3{g(rng), g(rng), g(rng)}.normalized();
  return out;
}

}  // namespace

TEST_CASE("low-order values") {
  CHECK(sh_eval({0.6, 0, 0.8}, 0, ShNorm::kSN3D) == std::vector<double>{1.0});
  CHECK(sh_eval({0, 0, 1}, 1, ShNorm::kSN3D) == std::vector<double>{1, 0, 1, 0});
  const auto x = sh_eval({1, 0, 0}, 1, ShNorm::kN3D);
  REQUIRE(x.size() == 4);
  CHECK(x[0] == 1.0);
  CHECK(x[1] == 0.0);
  CHECK(x[2] == 0.0);
  CHECK(x[3] == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
  CHECK(acn(1, -1) == 1);
  CHECK(acn(9, 9) == 99);
  CHECK(acn_degree(0) == 0);
  CHECK(acn_degree(3) == 1);
  CHECK(acn_degree(4) == 2);
  CHECK(acn_degree(99) == 9);
}

TEST_CASE("recurrence matches closed-form polynomials up to degree 3") {
  for (const Vec3& d : random_directions(1000, 1)) {
    const auto got = sh_eval(d, 3, ShNorm::kSN3D);
    const auto want = oracle::closed_form_sn3d(d.x, d.y, d.z);
    for (std::size_t i = 0; i < 16; ++i) CHECK(std::abs(got[i] - want[i]) <= 1e-12);
  }
  for (const Vec3& d : {Vec3{0, 0, 1}, Vec3{0, 0, -1}, Vec3{1, 0, 0}, Vec3{0, -1, 0}}) {
    const auto got = sh_eval(d, 3, ShNorm::kSN3D);
    const auto want = oracle::closed_form_sn3d(d.x, d.y, d.z);
    for (std::size_t i = 0; i < 16; ++i) CHECK(std::abs(got[i] - want[i]) <= 1e-12);
  }
}

TEST_CASE("addition theorem holds per degree at order 9") {
  const auto dirs = random_directions(1000, 2);
  const auto rows = sh_eval_batch(dirs, 9, ShNorm::kN3D);
  REQUIRE(rows.size() == 1000 * 100);
  for (std::size_t r = 0; r < dirs.size(); ++r) {
    for (int l = 0; l <= 9; ++l) {
      double sum = 0.0;
      for (int m = -l; m <= l; ++m) sum += oracle::sq(rows[r * 100 + acn(l, m)]);
      CHECK(std::abs(sum - (2 * l + 1)) <= 1e-10);
    }
  }
}

TEST_CASE("SN3D is N3D divided by sqrt(2l+1)") {
  for (const Vec3& d : random_directions(200, 3)) {
    const auto n3d = sh_eval(d, 9, ShNorm::kN3D);
    const auto sn3d = sh_eval(d, 9, ShNorm::kSN3D);
    for (std::size_t i = 0; i < n3d.size(); ++i) {
      CHECK(sn3d[i] == n3d[i] / std::sqrt(2.0 * acn_degree(i) + 1.0));
    }
  }
}

TEST_CASE("coefficients respect the degree bound, including poles and axes") {
  auto dirs = random_directions(2000, 4);
  for (const Vec3& a : {Vec3{0, 0, 1}, Vec3{0, 0, -1}, Vec3{1, 0, 0}, Vec3{-1, 0, 0},
                        Vec3{0, 1, 0}, Vec3{0, -1, 0}}) {
    dirs.push_back(a);
  }
  const auto rows = sh_eval_batch(dirs, 9, ShNorm::kN3D);
  for (std::size_t r = 0; r < dirs.size(); ++r) {
    for (std::size_t i = 0; i < 100; ++i) {
      const double v = rows[r * 100 + i];
      CHECK(std::isfinite(v));
      CHECK(std::abs(v) <= std::sqrt(2.0 * acn_degree(i) + 1.0) + 1e-9);
    }
  }
}

TEST_CASE("Monte-Carlo orthonormality over the sphere") {
  constexpr std::size_t kSamples = 1000000;
  constexpr std::size_t kChunk = 4000;
  constexpr std::size_t C = 100;
  std::vector<double> gram(C * C, 0.0);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  std::vector<Vec3> dirs(kChunk);
  for (std::size_t done = 0; done < kSamples; done += kChunk) {
    for (auto& d : dirs) d = Vec3{g(rng), g(rng), g(rng)}.normalized();
    const auto rows = sh_eval_batch(dirs, 9, ShNorm::kN3D);
    for (std::size_t r = 0; r < kChunk; ++r) {
      const double* y = &rows[r * C];
      for (std::size_t i = 0; i < C; ++i) {
        const double yi = y[i];
        double* gi = &gram[i * C];
        for (std::size_t j = i; j < C; ++j) gi[j] += yi * y[j];
      }
    }
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < C; ++i) {
    for (std::size_t j = i; j < C; ++j) {
      const double v = gram[i * C + j] / kSamples;  // (1/4pi) integral, times 4pi
      worst = std::max(worst, std::abs(v - (i == j ? 1.0 : 0.0)));
    }
  }
  MESSAGE("largest deviation from identity: " << worst);
  CHECK(worst <= 0.02);
}

TEST_CASE("batch interface") {
  CHECK(sh_eval_batch({}, 4).empty());
  const auto dirs = random_directions(37, 6);
  std::vector<Vec3> dup = dirs;
  dup.push_back(dirs[5]);
  const auto rows = sh_eval_batch(dup, 5, ShNorm::kSN3D);
  const std::size_t C = sh_channels(5);
  for (std::size_t r = 0; r < dirs.size(); ++r) {
    const auto single = sh_eval(dirs[r], 5, ShNorm::kSN3D);
    for (std::size_t i = 0; i < C; ++i) CHECK(rows[r * C + i] == single[i]);
  }
  for (std::size_t i = 0; i < C; ++i) CHECK(rows[dirs.size() * C + i] == rows[5 * C + i]);
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(sh_eval({0, 0, 1}, 10), ConfigError);
  CHECK_THROWS_AS(sh_eval({0, 0, 1}, -1), ConfigError);
  CHECK_THROWS_AS(sh_eval({0, 0, 1.01}, 2), ConfigError);
  CHECK_THROWS_AS(sh_eval({0, 0, 0}, 2), ConfigError);
  const auto nearly = sh_eval({0, 0.6, 0.8 * 1.0005}, 4);
  const auto exact = sh_eval(Vec3{0, 0.6, 0.8 * 1.0005}.normalized(), 4);
  for (std::size_t i = 0; i < exact.size(); ++i) CHECK(nearly[i] == exact[i]);
  std::vector<Vec3> dirs(12, Vec3{1, 0, 0});
  dirs[9] = {2, 0, 0};
  CHECK_THROWS_WITH_AS(sh_eval_batch(dirs, 1), doctest::Contains("row 9"), ConfigError);
}
