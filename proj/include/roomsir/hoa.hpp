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

#include <cstddef>
#include <span>
#include <vector>

#include "roomsir/vec3.hpp"

namespace roomsir {

// Real spherical harmonics, ACN channel order, no Condon-Shortley phase.
inline constexpr int kMaxShOrder = 9;

enum class ShNorm { kN3D, kSN3D };

constexpr std::size_t sh_channels(int order) {
  return static_cast<std::size_t>((order + 1) * (order + 1));
}
constexpr std::size_t acn(int l, int m) { return static_cast<std::size_t>(l * l + l + m); }
// Degree l of ACN channel `channel`.
int acn_degree(std::size_t channel);

// Directions may deviate from unit length by less than 1e-3 and are
// renormalized; larger deviations and orders above 9 throw ConfigError.
std::vector<double> sh_eval(const Vec3& direction, int order, ShNorm norm = ShNorm::kN3D);
void sh_eval(const Vec3& direction, int order, ShNorm norm, std::span<double> out);

// Row-major [n x (order+1)^2]; row i equals sh_eval(directions[i]).
std::vector<double> sh_eval_batch(std::span<const Vec3> directions, int order,
                                  ShNorm norm = ShNorm::kN3D);

}  // namespace roomsir
