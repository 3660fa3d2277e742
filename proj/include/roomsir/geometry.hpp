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
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "roomsir/vec3.hpp"

namespace roomsir {

using SurfaceId = std::uint32_t;

inline constexpr double kDefaultEps = 1e-4;
inline constexpr double kDefaultSpeedOfSound = 343.0;
inline constexpr double kDefaultSourceRadius = 0.25;

// Octave bands 62.5 Hz .. 8 kHz.
std::vector<double> default_band_centers();

struct Material {
  std::string name;
  std::vector<double> absorption;  // one coefficient per band, in [0,1]
  double scattering = 0.0;         // probability of a diffuse continuation
};

// One triangle. Triangles that make up the same planar wall may share an id;
// every triangle sharing an id must be coplanar.
struct Surface {
  std::array<Vec3, 3> vertices;
  Vec3 normal;
  std::uint32_t material = 0;
  SurfaceId id = 0;

  double area() const;
};

struct Hit {
  SurfaceId surface_id = 0;
  std::uint32_t triangle = 0;  // index into Scene::surfaces()
  Vec3 point;
  double distance = 0.0;
  Vec3 normal;
};

struct Aabb {
  Vec3 lo{1e300, 1e300, 1e300};
  Vec3 hi{-1e300, -1e300, -1e300};

  void extend(const Vec3& p);
  void extend(const Aabb& b);
  Vec3 center() const { return (lo + hi) * 0.5; }
  bool strictly_contains(const Vec3& p) const;
};

// Ray/triangle test (Moller-Trumbore). Returns the ray parameter or nothing.
std::optional<double> intersect_triangle(const Surface& tri, const Vec3& origin, const Vec3& dir);

// Entry/exit parameters of a ray against a sphere, if the infinite line hits it.
std::optional<std::pair<double, double>> intersect_sphere(const Vec3& origin, const Vec3& dir,
                                                          const Vec3& center, double radius);

// Median-split bounding volume hierarchy over a fixed triangle list.
class Bvh {
 public:
  static constexpr std::size_t kMaxLeafSize = 4;

  Bvh() = default;
  explicit Bvh(std::span<const Surface> triangles);

  // Nearest hit with t in (t_min, t_max). Ties on t resolve to the lower
  // triangle index. `ignore` lists surface ids that are skipped.
  std::optional<Hit> nearest(std::span<const Surface> triangles, const Vec3& origin,
                             const Vec3& dir, double t_min, double t_max,
                             std::span<const SurfaceId> ignore = {}) const;

  bool any(std::span<const Surface> triangles, const Vec3& origin, const Vec3& dir, double t_min,
           double t_max, std::span<const SurfaceId> ignore = {}) const;

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t max_leaf_size() const;

 private:
  struct Node {
    Aabb box;
    std::uint32_t first = 0;  // first primitive (leaf) or right child (inner)
    std::uint32_t count = 0;  // 0 for inner nodes
  };

  std::uint32_t build(std::span<const Surface> triangles, std::uint32_t begin, std::uint32_t end);

  template <typename Visit>
  void traverse(const Vec3& origin, const Vec3& dir, double t_min, double& t_max,
                Visit&& visit) const;

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> order_;  // primitive indices, leaf ranges index into this
};

struct ShoeboxDims {
  double lx = 0.0;
  double ly = 0.0;
  double lz = 0.0;
};

struct SceneParams {
  Vec3 source;
  Vec3 listener;
  double source_radius = kDefaultSourceRadius;
  double speed_of_sound = kDefaultSpeedOfSound;
  std::vector<double> band_centers_hz = default_band_centers();
  std::vector<double> air_absorption;  // nepers per meter, one per band; empty means zero
  std::optional<ShoeboxDims> shoebox;  // set when the geometry is an axis-aligned box
};

// Immutable scene: triangles, materials, one source sphere and one listener.
// Construction validates every invariant and builds the accelerator.
class Scene {
 public:
  Scene(std::vector<Surface> surfaces, std::vector<Material> materials, SceneParams params);

  // Axis-aligned room [0,lx]x[0,ly]x[0,lz]: 12 triangles, 6 wall ids with
  // normals facing into the room. Wall ids: 0 x=0, 1 x=lx, 2 y=0, 3 y=ly,
  // 4 floor z=0, 5 ceiling z=lz. `wall_materials` holds a material index per
  // wall; empty means material 0 everywhere.
  static Scene shoebox(const ShoeboxDims& dims, std::vector<Material> materials, SceneParams params,
                       const std::array<std::uint32_t, 6>& wall_materials = {});

  std::span<const Surface> surfaces() const { return surfaces_; }
  std::span<const Material> materials() const { return materials_; }
  const Material& material_of(const Surface& s) const { return materials_[s.material]; }
  const Material& material_of_id(SurfaceId id) const;

  const Vec3& source() const { return params_.source; }
  const Vec3& listener() const { return params_.listener; }
  double source_radius() const { return params_.source_radius; }
  double speed_of_sound() const { return params_.speed_of_sound; }
  std::span<const double> band_centers() const { return params_.band_centers_hz; }
  std::span<const double> air_absorption() const { return params_.air_absorption; }
  std::size_t band_count() const { return params_.band_centers_hz.size(); }
  const std::optional<ShoeboxDims>& shoebox_dims() const { return params_.shoebox; }
  const SceneParams& params() const { return params_; }
  const Aabb& bounds() const { return bounds_; }
  const Bvh& bvh() const { return bvh_; }

  // Distinct surface ids in ascending order.
  std::span<const SurfaceId> surface_ids() const { return ids_; }
  bool has_surface(SurfaceId id) const;
  // Triangle indices making up surface `id`.
  std::span<const std::uint32_t> triangles_of(SurfaceId id) const;
  // Unit normal and offset of the plane of surface `id`: dot(n, p) = offset.
  std::pair<Vec3, double> plane_of(SurfaceId id) const;

  // Stable 64-bit content hash (geometry, materials, placements, bands).
  std::uint64_t content_hash() const;

 private:
  std::vector<Surface> surfaces_;
  std::vector<Material> materials_;
  SceneParams params_;
  Aabb bounds_;
  Bvh bvh_;
  std::vector<SurfaceId> ids_;
  std::vector<std::vector<std::uint32_t>> id_triangles_;  // indexed by position in ids_
};

// Nearest hit with distance > eps, or nothing.
std::optional<Hit> ray_intersect(const Scene& scene, const Vec3& origin, const Vec3& direction,
                                 double eps = kDefaultEps);

// True iff a surface not in `ignore` crosses the open segment
// (a + eps*d, b - eps*d), d = unit(b - a).
bool segment_occluded(const Scene& scene, const Vec3& a, const Vec3& b, double eps = kDefaultEps,
                      std::span<const SurfaceId> ignore = {});

}  // namespace roomsir
