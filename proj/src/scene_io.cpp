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

#include "roomsir/scene_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "roomsir/error.hpp"

namespace roomsir {

using nlohmann::json;

namespace {

double override_number(const SceneOverrides& overrides, const std::string& key) {
  const std::string& text = overrides.at(key);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty()) {
    throw ConfigError("override '" + key + "' expects a number, got '" + text + "'");
  }
  return v;
}

Vec3 read_vec3(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) throw SceneError(what + " must be an array of 3 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::vector<double> read_numbers(const json& j, const std::string& what) {
  if (!j.is_array()) throw SceneError(what + " must be an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw SceneError(what + " must contain only numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

// Resolves a surface key (wall name, OBJ group or usemtl) to a material index.
class MaterialResolver {
 public:
  MaterialResolver(const json& doc, const std::vector<Material>& materials)
      : materials_(materials) {
    if (!doc.contains("surface_materials")) {
      if (materials.size() != 1) {
        throw SceneError("surface_materials is required when more than one material is defined");
      }
      fallback_ = 0;
      return;
    }
    const json& sm = doc.at("surface_materials");
    if (sm.is_string()) {
      fallback_ = index_of(sm.get<std::string>());
    } else if (sm.is_object()) {
      for (const auto& [key, value] : sm.items()) {
        const auto idx = index_of(value.get<std::string>());
        if (key == "*") {
          fallback_ = idx;
        } else {
          mapping_[key] = idx;
        }
      }
    } else {
      throw SceneError("surface_materials must be a material name or an object");
    }
  }

  std::uint32_t resolve(std::initializer_list<std::string_view> keys) const {
    for (auto key : keys) {
      if (key.empty()) continue;
      if (auto it = mapping_.find(std::string(key)); it != mapping_.end()) return it->second;
    }
    for (auto key : keys) {
      for (std::uint32_t i = 0; i < materials_.size(); ++i) {
        if (!key.empty() && materials_[i].name == key) return i;
      }
    }
    if (fallback_) return *fallback_;
    throw SceneError("no material assigned to surface '" + std::string(*keys.begin()) + "'");
  }

  const std::map<std::string, std::uint32_t>& mapping() const { return mapping_; }

 private:
  std::uint32_t index_of(const std::string& name) const {
    for (std::uint32_t i = 0; i < materials_.size(); ++i) {
      if (materials_[i].name == name) return i;
    }
    throw SceneError("unknown material '" + name + "'");
  }

  const std::vector<Material>& materials_;
  std::map<std::string, std::uint32_t> mapping_;
  std::optional<std::uint32_t> fallback_;
};

Scene build_scene(const json& doc, const SceneOverrides& overrides,
                  const std::filesystem::path& base_dir) {
  for (const auto& [key, value] : overrides) {
    (void)value;
    if (key != "scale" && key != "absorption" && key != "scattering" && key != "source_radius" &&
        key != "speed_of_sound" && key != "bands") {
      throw ConfigError("unknown scene override '" + key + "'");
    }
  }
  const double scale = overrides.count("scale") ? override_number(overrides, "scale") : 1.0;
  if (!(scale > 0.0)) throw ConfigError("scale override must be positive");

  SceneParams params;
  if (doc.contains("bands")) params.band_centers_hz = read_numbers(doc.at("bands"), "bands");
  if (overrides.count("bands")) {
    params.band_centers_hz.clear();
    std::stringstream list(overrides.at("bands"));
    for (std::string item; std::getline(list, item, ',');) {
      try {
        std::size_t used = 0;
        params.band_centers_hz.push_back(std::stod(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw ConfigError("bands override must be a comma-separated list of numbers");
      }
    }
  }
  const std::size_t bands = params.band_centers_hz.size();
  if (doc.contains("air_absorption")) {
    params.air_absorption = read_numbers(doc.at("air_absorption"), "air_absorption");
  }
  if (doc.contains("speed_of_sound")) params.speed_of_sound = doc.at("speed_of_sound").get<double>();
  if (overrides.count("speed_of_sound")) {
    params.speed_of_sound = override_number(overrides, "speed_of_sound");
  }

  if (!doc.contains("source") || !doc.at("source").contains("position")) {
    throw SceneError("scene is missing source.position");
  }
  if (!doc.contains("listener") || !doc.at("listener").contains("position")) {
    throw SceneError("scene is missing listener.position");
  }
  params.source = read_vec3(doc.at("source").at("position"), "source.position") * scale;
  params.listener = read_vec3(doc.at("listener").at("position"), "listener.position") * scale;
  if (doc.at("source").contains("radius")) {
    params.source_radius = doc.at("source").at("radius").get<double>();
  }
  if (overrides.count("source_radius")) {
    params.source_radius = override_number(overrides, "source_radius");
  }

  if (!doc.contains("materials") || !doc.at("materials").is_object() ||
      doc.at("materials").empty()) {
    throw SceneError("scene must define at least one material");
  }
  std::vector<Material> materials;
  for (const auto& [name, m] : doc.at("materials").items()) {
    Material mat;
    mat.name = name;
    const json& a = m.at("absorption");
    if (a.is_number()) {
      mat.absorption.assign(bands, a.get<double>());
    } else {
      mat.absorption = read_numbers(a, "absorption of '" + name + "'");
    }
    mat.scattering = m.value("scattering", 0.0);
    materials.push_back(std::move(mat));
  }
  if (overrides.count("absorption")) {
    const double a = override_number(overrides, "absorption");
    for (auto& m : materials) m.absorption.assign(bands, a);
  }
  if (overrides.count("scattering")) {
    const double s = override_number(overrides, "scattering");
    for (auto& m : materials) m.scattering = s;
  }
  const MaterialResolver resolver(doc, materials);

  const bool has_box = doc.contains("shoebox");
  const bool has_mesh = doc.contains("mesh");
  if (has_box == has_mesh) throw SceneError("scene needs exactly one of 'shoebox' or 'mesh'");

  if (has_box) {
    const json& box = doc.at("shoebox");
    const ShoeboxDims dims{box.at("lx").get<double>() * scale, box.at("ly").get<double>() * scale,
                           box.at("lz").get<double>() * scale};
    for (const auto& [key, idx] : resolver.mapping()) {
      (void)idx;
      if (std::find(kShoeboxWallNames.begin(), kShoeboxWallNames.end(), key) ==
          kShoeboxWallNames.end()) {
        throw SceneError("unknown shoebox wall '" + key + "'");
      }
    }
    std::array<std::uint32_t, 6> walls{};
    for (std::size_t w = 0; w < walls.size(); ++w) walls[w] = resolver.resolve({kShoeboxWallNames[w]});
    return Scene::shoebox(dims, std::move(materials), std::move(params), walls);
  }

  const std::filesystem::path mesh_path = base_dir / doc.at("mesh").get<std::string>();
  std::ifstream in(mesh_path);
  if (!in) throw IoError("mesh not found: " + mesh_path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const ObjMesh mesh = parse_obj(buffer.str());
  if (mesh.triangles.empty()) throw SceneError("mesh has no faces: " + mesh_path.string());

  std::vector<Surface> surfaces;
  surfaces.reserve(mesh.triangles.size());
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
    Surface s;
    for (int k = 0; k < 3; ++k) s.vertices[k] = mesh.triangles[i][k] * scale;
    const Vec3 n = cross(s.vertices[1] - s.vertices[0], s.vertices[2] - s.vertices[0]);
    if (!(n.norm() > 0.0)) throw SceneError("degenerate triangle in mesh");
    s.normal = n.normalized();
    s.material = resolver.resolve({mesh.materials[i], mesh.groups[i]});
    s.id = static_cast<SurfaceId>(i);
    surfaces.push_back(s);
  }
  return Scene(std::move(surfaces), std::move(materials), std::move(params));
}

}  // namespace

Scene parse_scene(std::string_view json_text, const SceneOverrides& overrides,
                  const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw SceneError(std::string("scene parse error: ") + e.what());
  }
  try {
    return build_scene(doc, overrides, base_dir);
  } catch (const json::exception& e) {
    throw SceneError(std::string("scene schema error: ") + e.what());
  }
}

Scene load_scene(const std::filesystem::path& path, const SceneOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw IoError("scene not found: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scene(buffer.str(), overrides, path.parent_path());
}

ObjMesh parse_obj(std::string_view text) {
  ObjMesh mesh;
  std::vector<Vec3> vertices;
  std::string group;
  std::string material;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ls >> v.x >> v.y >> v.z)) {
        throw SceneError("obj line " + std::to_string(line_no) + ": malformed vertex");
      }
      vertices.push_back(v);
    } else if (tag == "o" || tag == "g") {
      ls >> group;
    } else if (tag == "usemtl") {
      ls >> material;
    } else if (tag == "f") {
      std::vector<Vec3> poly;
      std::string token;
      while (ls >> token) {
        const std::string head = token.substr(0, token.find('/'));
        long idx = 0;
        const auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), idx);
        if (ec != std::errc() || ptr != head.data() + head.size() || idx == 0) {
          throw SceneError("obj line " + std::to_string(line_no) + ": bad face index '" + token + "'");
        }
        const long resolved = idx > 0 ? idx - 1 : static_cast<long>(vertices.size()) + idx;
        if (resolved < 0 || resolved >= static_cast<long>(vertices.size())) {
          throw SceneError("obj line " + std::to_string(line_no) + ": face index out of range");
        }
        poly.push_back(vertices[static_cast<std::size_t>(resolved)]);
      }
      if (poly.size() < 3) {
        throw SceneError("obj line " + std::to_string(line_no) + ": face needs 3 vertices");
      }
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
        mesh.triangles.push_back({poly[0], poly[k], poly[k + 1]});
        mesh.groups.push_back(group);
        mesh.materials.push_back(material);
      }
    }
  }
  return mesh;
}

}  // namespace roomsir
