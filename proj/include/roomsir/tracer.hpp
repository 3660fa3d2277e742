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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "roomsir/geometry.hpp"
#include "roomsir/path_set.hpp"

namespace roomsir {

// How specular reflection sequences are found.
//   kExhaustive: enumerate every surface sequence up to the depth cap and
//                validate each one (image-source method).
//   kStochastic: cast specular rays from the listener; a sequence becomes a
//                candidate when a ray segment crosses the source sphere.
//   kAuto:       exhaustive for shoeboxes, stochastic for meshes.
enum class SpecularDiscovery { kAuto, kExhaustive, kStochastic };

struct SimConfig {
  std::uint64_t n_diffuse = 20000;
  std::uint64_t n_specular = 2000;
  std::uint32_t max_specular_depth = 8;
  std::uint32_t max_diffuse_depth = 32;
  std::uint64_t rng_seed = 0;
  std::uint32_t visibility_samples = 64;
  double eps = kDefaultEps;
  SpecularDiscovery specular_discovery = SpecularDiscovery::kAuto;
  // Diffuse rays register sphere crossings only after this many diffuse
  // bounces. 1 keeps them disjoint from the specular and direct paths; 0 is
  // used to check the estimator against the direct-path closed form.
  std::uint32_t min_diffuse_bounces = 1;
  std::uint32_t workers = 1;

  void validate() const;
};

SimConfig parse_sim_config(std::string_view json_text);
std::string to_json(const SimConfig& config);

// Fraction of rays toward the source sphere that reach it unobstructed.
// Samples are uniform in solid angle within the cone the sphere subtends from
// the listener. Returns 1 when the listener is inside the sphere.
double direct_visibility(const Scene& scene, const SimConfig& config);

// Builds the specular path for `surface_sequence` (listener side first) by
// mirroring the source across the sequence. Returns nothing when a
// reflection point misses its surface or a segment is blocked.
std::optional<PathRecord> validate_specular(const Scene& scene,
                                            std::span<const SurfaceId> surface_sequence,
                                            double eps = kDefaultEps);

// All paths in double precision: direct first, then specular paths ordered
// by reflection order and then surface sequence, then diffuse paths in ray order.
std::vector<PathRecord> trace_records(const Scene& scene, const SimConfig& config);

// trace_records() converted to columns with provenance metadata attached.
PathSet trace(const Scene& scene, const SimConfig& config);

}  // namespace roomsir
