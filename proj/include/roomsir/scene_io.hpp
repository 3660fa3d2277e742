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

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "roomsir/geometry.hpp"

namespace roomsir {

// Key/value overrides applied on top of a scene document. Recognized keys:
//   scale           multiply geometry and both positions (radius unchanged)
//   absorption      uniform absorption for every material and band
//   scattering      uniform scattering for every material
//   source_radius   meters
//   speed_of_sound  m/s
//   bands           comma-separated band centers in Hz
using SceneOverrides = std::map<std::string, std::string>;

// Reads a JSON scene document. Mesh paths are resolved relative to the
// document's directory.
//
// Throws IoError when the file is missing and SceneError for schema or
// invariant violations.
Scene load_scene(const std::filesystem::path& path, const SceneOverrides& overrides = {});

// Same, from an in-memory document.
Scene parse_scene(std::string_view json_text, const SceneOverrides& overrides = {},
                  const std::filesystem::path& base_dir = {});

// Shoebox wall names accepted in `surface_materials`, indexed by wall id.
inline constexpr std::array<std::string_view, 6> kShoeboxWallNames{
    "x_min", "x_max", "y_min", "y_max", "floor", "ceiling"};

// Triangulated Wavefront OBJ geometry. Each triangle gets its own surface id;
// `groups[i]` names the material key of triangle i (usemtl, else o/g name).
struct ObjMesh {
  std::vector<std::array<Vec3, 3>> triangles;
  std::vector<std::string> groups;
  std::vector<std::string> materials;
};

ObjMesh parse_obj(std::string_view text);

}  // namespace roomsir
