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

#include "roomsir/geometry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include "roomsir/error.hpp"
#include "roomsir/hash.hpp"

namespace roomsir {

std::vector<double> default_band_centers() {
  return {62.5, 125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0, 8000.0};
}

double Surface::area() const {
  return 0.5 * cross(vertices[1] - vertices[0], vertices[2] - vertices[0]).norm();
}

void Aabb::extend(const Vec3& p) {
  lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
  hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
}

void Aabb::extend(const Aabb& b) {
  extend(b.lo);
  extend(b.hi);
}

bool Aabb::strictly_contains(const Vec3& p) const {
  return p.x > lo.x && p.x < hi.x && p.y > lo.y && p.y < hi.y && p.z > lo.z && p.z < hi.z;
}

std::optional<double> intersect_triangle(const Surface& tri, const Vec3& origin, const Vec3& dir) {
  const Vec3 e1 = tri.vertices[1] - tri.vertices[0];
  const Vec3 e2 = tri.vertices[2] - tri.vertices[0];
  const Vec3 p = cross(dir, e2);
  const double det = dot(e1, p);
  if (std::abs(det) <= 1e-14 * std::sqrt(e1.squared_norm() * e2.squared_norm())) {
    return std::nullopt;  // parallel to the plane
  }
  const double inv = 1.0 / det;
  const Vec3 tvec = origin - tri.vertices[0];
  const double u = dot(tvec, p) * inv;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Vec3 q = cross(tvec, e1);
  const double v = dot(dir, q) * inv;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  return dot(e2, q) * inv;
}

std::optional<std::pair<double, double>> intersect_sphere(const Vec3& origin, const Vec3& dir,
                                                          const Vec3& center, double radius) {
  const Vec3 oc = origin - center;
  const double b = dot(oc, dir);
  const double c = oc.squared_norm() - radius * radius;
  const double disc = b * b - c;
  if (disc <= 0.0) return std::nullopt;
  const double s = std::sqrt(disc);
  return std::make_pair(-b - s, -b + s);
}

// --- Bvh -------------------------------------------------------------------

namespace {

Aabb triangle_box(const Surface& s) {
  Aabb b;
  for (const auto& v : s.vertices) b.extend(v);
  return b;
}

bool slab_hit(const Aabb& box, const Vec3& o, const Vec3& inv, const Vec3& dir, double t_min,
              double t_max) {
  double lo = t_min;
  double hi = t_max;
  for (int axis = 0; axis < 3; ++axis) {
    const double d = dir[axis];
    const double oa = o[axis];
    if (d == 0.0) {
      if (oa < box.lo[axis] || oa > box.hi[axis]) return false;
      continue;
    }
    double t0 = (box.lo[axis] - oa) * inv[axis];
    double t1 = (box.hi[axis] - oa) * inv[axis];
    if (t0 > t1) std::swap(t0, t1);
    lo = std::max(lo, t0);
    hi = std::min(hi, t1);
    if (lo > hi) return false;
  }
  return true;
}

bool ignored(std::span<const SurfaceId> ignore, SurfaceId id) {
  return std::find(ignore.begin(), ignore.end(), id) != ignore.end();
}

}  // namespace

Bvh::Bvh(std::span<const Surface> triangles) {
  order_.resize(triangles.size());
  std::iota(order_.begin(), order_.end(), 0u);
  if (!triangles.empty()) {
    nodes_.reserve(2 * triangles.size());
    build(triangles, 0, static_cast<std::uint32_t>(triangles.size()));
  }
}

std::uint32_t Bvh::build(std::span<const Surface> triangles, std::uint32_t begin,
                         std::uint32_t end) {
  const auto index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back({});
  Aabb box;
  Aabb centroids;
  for (std::uint32_t i = begin; i < end; ++i) {
    const Aabb tb = triangle_box(triangles[order_[i]]);
    box.extend(tb);
    centroids.extend(tb.center());
  }
  nodes_[index].box = box;
  const std::uint32_t count = end - begin;
  if (count <= kMaxLeafSize) {
    nodes_[index].first = begin;
    nodes_[index].count = count;
    return index;
  }

  const Vec3 extent = centroids.hi - centroids.lo;
  int axis = 0;
  if (extent.y > extent[axis]) axis = 1;
  if (extent.z > extent[axis]) axis = 2;
  const std::uint32_t mid = begin + count / 2;
  auto key = [&](std::uint32_t t) { return triangle_box(triangles[t]).center()[axis]; };
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double ka = key(a);
                     const double kb = key(b);
                     return ka < kb || (ka == kb && a < b);
                   });

  build(triangles, begin, mid);  // left child is index + 1
  const std::uint32_t right = build(triangles, mid, end);
  nodes_[index].first = right;
  nodes_[index].count = 0;
  return index;
}

std::size_t Bvh::max_leaf_size() const {
  std::size_t m = 0;
  for (const auto& n : nodes_) m = std::max<std::size_t>(m, n.count);
  return m;
}

template <typename Visit>
void Bvh::traverse(const Vec3& origin, const Vec3& dir, double t_min, double& t_max,
                   Visit&& visit) const {
  if (nodes_.empty()) return;
  const Vec3 inv{1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z};
  std::array<std::uint32_t, 64> stack;
  std::size_t top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (!slab_hit(node.box, origin, inv, dir, t_min, t_max)) continue;
    if (node.count > 0) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        if (visit(order_[i])) return;
      }
    } else {
      const auto self = static_cast<std::uint32_t>(&node - nodes_.data());
      stack[top++] = node.first;
      stack[top++] = self + 1;
    }
  }
}

std::optional<Hit> Bvh::nearest(std::span<const Surface> triangles, const Vec3& origin,
                                const Vec3& dir, double t_min, double t_max,
                                std::span<const SurfaceId> ignore) const {
  std::uint32_t best = std::numeric_limits<std::uint32_t>::max();
  double best_t = t_max;
  double bound = t_max;
  traverse(origin, dir, t_min, bound, [&](std::uint32_t tri) {
    const Surface& s = triangles[tri];
    if (!ignore.empty() && ignored(ignore, s.id)) return false;
    const auto t = intersect_triangle(s, origin, dir);
    if (!t || *t <= t_min || *t >= t_max) return false;
    if (*t < best_t || (*t == best_t && tri < best)) {
      best_t = *t;
      best = tri;
      bound = best_t;
    }
    return false;
  });
  if (best == std::numeric_limits<std::uint32_t>::max()) return std::nullopt;
  const Surface& s = triangles[best];
  return Hit{s.id, best, origin + dir * best_t, best_t, s.normal};
}

bool Bvh::any(std::span<const Surface> triangles, const Vec3& origin, const Vec3& dir,
              double t_min, double t_max, std::span<const SurfaceId> ignore) const {
  bool found = false;
  double bound = t_max;
  traverse(origin, dir, t_min, bound, [&](std::uint32_t tri) {
    const Surface& s = triangles[tri];
    if (!ignore.empty() && ignored(ignore, s.id)) return false;
    const auto t = intersect_triangle(s, origin, dir);
    if (t && *t > t_min && *t < t_max) {
      found = true;
      return true;
    }
    return false;
  });
  return found;
}

// --- Scene -----------------------------------------------------------------

namespace {

void check_unit_interval(double v, const std::string& what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw SceneError(what + " must lie in [0,1], got " + std::to_string(v));
  }
}

}  // namespace

Scene::Scene(std::vector<Surface> surfaces, std::vector<Material> materials, SceneParams params)
    : surfaces_(std::move(surfaces)), materials_(std::move(materials)), params_(std::move(params)) {
  const std::size_t bands = params_.band_centers_hz.size();
  if (bands == 0) throw SceneError("at least one frequency band is required");
  for (std::size_t b = 0; b < bands; ++b) {
    if (!(params_.band_centers_hz[b] > 0.0) ||
        (b > 0 && !(params_.band_centers_hz[b] > params_.band_centers_hz[b - 1]))) {
      throw SceneError("band centers must be positive and strictly increasing");
    }
  }
  if (params_.air_absorption.empty()) params_.air_absorption.assign(bands, 0.0);
  if (params_.air_absorption.size() != bands) {
    throw SceneError("air_absorption needs one value per band");
  }
  for (double a : params_.air_absorption) {
    if (!(a >= 0.0) || !std::isfinite(a)) throw SceneError("air absorption must be finite and >= 0");
  }
  if (!(params_.source_radius > 0.0)) throw SceneError("source radius must be positive");
  if (!(params_.speed_of_sound > 0.0)) throw SceneError("speed of sound must be positive");
  if (materials_.empty()) throw SceneError("scene has no materials");
  for (const auto& m : materials_) {
    if (m.absorption.size() != bands) {
      throw SceneError("material '" + m.name + "' has " + std::to_string(m.absorption.size()) +
                       " absorption values, expected " + std::to_string(bands));
    }
    for (double a : m.absorption) check_unit_interval(a, "absorption of '" + m.name + "'");
    check_unit_interval(m.scattering, "scattering of '" + m.name + "'");
  }
  if (surfaces_.empty()) throw SceneError("scene has no surfaces");

  for (const auto& s : surfaces_) {
    for (const auto& v : s.vertices) {
      if (!v.is_finite()) throw SceneError("non-finite vertex");
    }
    if (!(s.area() > 1e-12)) throw SceneError("degenerate triangle (zero area)");
    if (std::abs(s.normal.norm() - 1.0) > 1e-6) throw SceneError("surface normal is not unit length");
    const Vec3 e1 = (s.vertices[1] - s.vertices[0]).normalized();
    const Vec3 e2 = (s.vertices[2] - s.vertices[0]).normalized();
    if (std::abs(dot(s.normal, e1)) > 1e-6 || std::abs(dot(s.normal, e2)) > 1e-6) {
      throw SceneError("surface normal is not orthogonal to the triangle");
    }
    if (s.material >= materials_.size()) throw SceneError("surface references unknown material");
    bounds_.extend(triangle_box(s));
  }

  if (!params_.source.is_finite() || !params_.listener.is_finite()) {
    throw SceneError("non-finite source or listener position");
  }
  if (!bounds_.strictly_contains(params_.source)) throw SceneError("source outside geometry");
  if (!bounds_.strictly_contains(params_.listener)) throw SceneError("listener outside geometry");

  for (const auto& s : surfaces_) ids_.push_back(s.id);
  std::sort(ids_.begin(), ids_.end());
  ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
  id_triangles_.resize(ids_.size());
  for (std::uint32_t t = 0; t < surfaces_.size(); ++t) {
    const auto pos = std::lower_bound(ids_.begin(), ids_.end(), surfaces_[t].id) - ids_.begin();
    id_triangles_[pos].push_back(t);
  }
  for (const auto& tris : id_triangles_) {
    const Surface& first = surfaces_[tris.front()];
    const double offset = dot(first.normal, first.vertices[0]);
    const double scale = std::max(1.0, std::abs(offset));
    for (auto t : tris) {
      const Surface& s = surfaces_[t];
      if (dot(s.normal, first.normal) < 1.0 - 1e-9) {
        throw SceneError("triangles sharing surface id " + std::to_string(s.id) + " are not coplanar");
      }
      for (const auto& v : s.vertices) {
        if (std::abs(dot(first.normal, v) - offset) > 1e-9 * scale) {
          throw SceneError("triangles sharing surface id " + std::to_string(s.id) +
                           " are not coplanar");
        }
      }
    }
  }

  bvh_ = Bvh(surfaces_);
}

Scene Scene::shoebox(const ShoeboxDims& dims, std::vector<Material> materials, SceneParams params,
                     const std::array<std::uint32_t, 6>& wall_materials) {
  if (!(dims.lx > 0.0) || !(dims.ly > 0.0) || !(dims.lz > 0.0)) {
    throw SceneError("degenerate dimension: shoebox sides must be positive");
  }
  const double X = dims.lx;
  const double Y = dims.ly;
  const double Z = dims.lz;
  struct Wall {
    std::array<Vec3, 4> corners;
    Vec3 inward;
  };
  const std::array<Wall, 6> walls{{
      {{{{0, 0, 0}, {0, Y, 0}, {0, Y, Z}, {0, 0, Z}}}, {1, 0, 0}},
      {{{{X, 0, 0}, {X, Y, 0}, {X, Y, Z}, {X, 0, Z}}}, {-1, 0, 0}},
      {{{{0, 0, 0}, {X, 0, 0}, {X, 0, Z}, {0, 0, Z}}}, {0, 1, 0}},
      {{{{0, Y, 0}, {X, Y, 0}, {X, Y, Z}, {0, Y, Z}}}, {0, -1, 0}},
      {{{{0, 0, 0}, {X, 0, 0}, {X, Y, 0}, {0, Y, 0}}}, {0, 0, 1}},
      {{{{0, 0, Z}, {X, 0, Z}, {X, Y, Z}, {0, Y, Z}}}, {0, 0, -1}},
  }};

  std::vector<Surface> surfaces;
  surfaces.reserve(12);
  for (SurfaceId id = 0; id < walls.size(); ++id) {
    const Wall& w = walls[id];
    for (const auto& tri : {std::array<int, 3>{0, 1, 2}, std::array<int, 3>{0, 2, 3}}) {
      Surface s;
      s.vertices = {w.corners[tri[0]], w.corners[tri[1]], w.corners[tri[2]]};
      if (dot(cross(s.vertices[1] - s.vertices[0], s.vertices[2] - s.vertices[0]), w.inward) < 0) {
        std::swap(s.vertices[1], s.vertices[2]);
      }
      s.normal = w.inward;
      s.material = wall_materials[id];
      s.id = id;
      surfaces.push_back(s);
    }
  }
  params.shoebox = dims;
  return Scene(std::move(surfaces), std::move(materials), std::move(params));
}

const Material& Scene::material_of_id(SurfaceId id) const {
  return material_of(surfaces_[triangles_of(id).front()]);
}

bool Scene::has_surface(SurfaceId id) const {
  return std::binary_search(ids_.begin(), ids_.end(), id);
}

std::span<const std::uint32_t> Scene::triangles_of(SurfaceId id) const {
  const auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
  if (it == ids_.end() || *it != id) return {};
  return id_triangles_[static_cast<std::size_t>(it - ids_.begin())];
}

std::pair<Vec3, double> Scene::plane_of(SurfaceId id) const {
  const Surface& s = surfaces_[triangles_of(id).front()];
  return {s.normal, dot(s.normal, s.vertices[0])};
}

std::uint64_t Scene::content_hash() const {
  Fnv1a h;
  for (const auto& s : surfaces_) {
    for (const auto& v : s.vertices) h.add(v);
    h.add(s.normal);
    h.add(s.material);
    h.add(s.id);
  }
  for (const auto& m : materials_) {
    h.add(m.name);
    for (double a : m.absorption) h.add(a);
    h.add(m.scattering);
  }
  h.add(params_.source);
  h.add(params_.listener);
  h.add(params_.source_radius);
  h.add(params_.speed_of_sound);
  for (double b : params_.band_centers_hz) h.add(b);
  for (double a : params_.air_absorption) h.add(a);
  return h.value();
}

std::optional<Hit> ray_intersect(const Scene& scene, const Vec3& origin, const Vec3& direction,
                                 double eps) {
  return scene.bvh().nearest(scene.surfaces(), origin, direction, eps,
                             std::numeric_limits<double>::infinity());
}

bool segment_occluded(const Scene& scene, const Vec3& a, const Vec3& b, double eps,
                      std::span<const SurfaceId> ignore) {
  const Vec3 d = b - a;
  const double len = d.norm();
  if (len <= 2.0 * eps) return false;
  return scene.bvh().any(scene.surfaces(), a, d / len, eps, len - eps, ignore);
}

}  // namespace roomsir
