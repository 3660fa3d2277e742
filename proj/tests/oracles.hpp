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

// Independent reference implementations used only by tests. Nothing here
// calls into the code paths it is used to check.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <vector>

#include "roomsir/geometry.hpp"
#include "roomsir/vec3.hpp"

namespace roomsir::oracle {

// Plane intersection followed by a barycentric inside test.
struct BruteHit {
  std::uint32_t triangle;
  SurfaceId id;
  double distance;
};

inline std::optional<BruteHit> brute_force_intersect(std::span<const Surface> tris,
                                                     const Vec3& o, const Vec3& d, double eps) {
  std::optional<BruteHit> best;
  for (std::uint32_t i = 0; i < tris.size(); ++i) {
    const Surface& s = tris[i];
    const Vec3 n = cross(s.vertices[1] - s.vertices[0], s.vertices[2] - s.vertices[0]);
    const double denom = dot(n, d);
    if (denom == 0.0) continue;
    const double t = dot(n, s.vertices[0] - o) / denom;
    if (!(t > eps)) continue;
    const Vec3 p = o + d * t;
    const Vec3 v0 = s.vertices[1] - s.vertices[0];
    const Vec3 v1 = s.vertices[2] - s.vertices[0];
    const Vec3 v2 = p - s.vertices[0];
    const double d00 = dot(v0, v0), d01 = dot(v0, v1), d11 = dot(v1, v1);
    const double d20 = dot(v2, v0), d21 = dot(v2, v1);
    const double den = d00 * d11 - d01 * d01;
    const double v = (d11 * d20 - d01 * d21) / den;
    const double w = (d00 * d21 - d01 * d20) / den;
    const double tol = 1e-12;
    if (v < -tol || w < -tol || v + w > 1.0 + tol) continue;
    if (!best || t < best->distance) best = BruteHit{i, s.id, t};
  }
  return best;
}

// Shoebox image sources enumerated on the integer lattice. Image (ix,iy,iz)
// has |ix|+|iy|+|iz| reflections; its wall sequence is the order in which the
// straight line from the listener to the image crosses the unfolded wall
// planes (simultaneous crossings ordered by wall id).
struct LatticeImage {
  std::array<int, 3> index;
  std::vector<SurfaceId> sequence;  // listener side first, wall ids as in Scene::shoebox
  double distance;
};

inline std::vector<LatticeImage> lattice_images(const ShoeboxDims& dims, const Vec3& listener,
                                                const Vec3& source, int max_order) {
  const std::array<double, 3> size{dims.lx, dims.ly, dims.lz};
  const std::array<double, 3> L{listener.x, listener.y, listener.z};
  const std::array<double, 3> S{source.x, source.y, source.z};
  std::vector<LatticeImage> out;
  for (int ix = -max_order; ix <= max_order; ++ix) {
    for (int iy = -max_order; iy <= max_order; ++iy) {
      for (int iz = -max_order; iz <= max_order; ++iz) {
        const int order = std::abs(ix) + std::abs(iy) + std::abs(iz);
        if (order == 0 || order > max_order) continue;
        const std::array<int, 3> idx{ix, iy, iz};
        std::array<double, 3> P{};
        for (int a = 0; a < 3; ++a) {
          const bool odd = (idx[a] % 2) != 0;
          P[a] = idx[a] * size[a] + (odd ? size[a] - S[a] : S[a]);
        }
        std::vector<std::pair<double, SurfaceId>> crossings;
        for (int a = 0; a < 3; ++a) {
          if (idx[a] == 0) continue;
          const int step = idx[a] > 0 ? 1 : -1;
          // Unfolded planes k*size between the room cell and the image cell.
          for (int k = (step > 0 ? 1 : 0); k != (step > 0 ? idx[a] + 1 : idx[a]); k += step) {
            const double plane = k * size[a];
            const double t = (plane - L[a]) / (P[a] - L[a]);
            const bool even = (k % 2) == 0;
            crossings.emplace_back(t, static_cast<SurfaceId>(2 * a + (even ? 0 : 1)));
          }
        }
        std::sort(crossings.begin(), crossings.end(), [](const auto& x, const auto& y) {
          if (std::abs(x.first - y.first) > 1e-12) return x.first < y.first;
          return x.second < y.second;
        });
        LatticeImage img;
        img.index = idx;
        for (const auto& c : crossings) img.sequence.push_back(c.second);
        double d2 = 0.0;
        for (int a = 0; a < 3; ++a) d2 += (P[a] - L[a]) * (P[a] - L[a]);
        img.distance = std::sqrt(d2);
        out.push_back(std::move(img));
      }
    }
  }
  return out;
}

// Real spherical harmonics, no Condon-Shortley phase, SN3D, written out as
// polynomials in (x, y, z) for degrees 0..3. ACN order.
inline std::array<double, 16> closed_form_sn3d(double x, double y, double z) {
  const double s58 = std::sqrt(5.0 / 8.0);
  const double s38 = std::sqrt(3.0 / 8.0);
  const double s3 = std::sqrt(3.0);
  const double s15 = std::sqrt(15.0);
  return {
      1.0,
      y,
      z,
      x,
      s3 * x * y,
      s3 * y * z,
      0.5 * (3.0 * z * z - 1.0),
      s3 * x * z,
      0.5 * s3 * (x * x - y * y),
      s58 * y * (3.0 * x * x - y * y),
      s15 * x * y * z,
      s38 * y * (5.0 * z * z - 1.0),
      0.5 * z * (5.0 * z * z - 3.0),
      s38 * x * (5.0 * z * z - 1.0),
      0.5 * s15 * z * (x * x - y * y),
      s58 * x * (x * x - 3.0 * y * y),
  };
}

inline double sq(double v) { return v * v; }

// Least-squares line fit; returns R^2.
inline double r_squared(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += sq(x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += sq(y[i] - my);
  }
  if (syy == 0.0) return 1.0;
  return sxy * sxy / (sxx * syy);
}

}  // namespace roomsir::oracle
