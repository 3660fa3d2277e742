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

#include "roomsir/tracer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "roomsir/error.hpp"
#include "roomsir/hash.hpp"

namespace roomsir {

using nlohmann::json;

namespace {

// Independent random streams per purpose; the per-ray stream index is the
// ray number, so results do not depend on how rays are split over workers.
constexpr std::uint64_t kDiffuseStream = 0x6469666675736521ULL;
constexpr std::uint64_t kSpecularStream = 0x7370656375617221ULL;
constexpr std::uint64_t kVisibilityStream = 0x7669736962696c21ULL;

using Rng = std::mt19937_64;

Rng make_rng(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index) {
  return Rng(mix_seed(seed ^ purpose, index));
}

double uniform(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Vec3 uniform_sphere(Rng& rng) {
  const double z = 1.0 - 2.0 * uniform(rng);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  const double phi = 2.0 * std::numbers::pi * uniform(rng);
  return {r * std::cos(phi), r * std::sin(phi), z};
}

// Orthonormal basis around unit `n` (Duff et al., branchless).
void basis(const Vec3& n, Vec3& t, Vec3& b) {
  const double sign = std::copysign(1.0, n.z);
  const double a = -1.0 / (sign + n.z);
  const double c = n.x * n.y * a;
  t = {1.0 + sign * n.x * n.x * a, sign * c, -sign * n.x};
  b = {c, sign + n.y * n.y * a, -n.y};
}

Vec3 cosine_hemisphere(const Vec3& n, Rng& rng) {
  const double u = uniform(rng);
  const double phi = 2.0 * std::numbers::pi * uniform(rng);
  const double r = std::sqrt(u);
  Vec3 t, b;
  basis(n, t, b);
  const Vec3 d = t * (r * std::cos(phi)) + b * (r * std::sin(phi)) + n * std::sqrt(1.0 - u);
  return d.normalized();
}

Vec3 around_axis(const Vec3& axis, double cos_theta, double phi) {
  const double sin_theta = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
  Vec3 t, b;
  basis(axis, t, b);
  return (t * (sin_theta * std::cos(phi)) + b * (sin_theta * std::sin(phi)) + axis * cos_theta)
      .normalized();
}

// Distance along `dir` at which a segment starting at `origin` and ending at
// `t_end` first touches the source sphere, or nothing.
std::optional<double> sphere_entry(const Scene& scene, const Vec3& origin, const Vec3& dir,
                                   double t_end) {
  const auto hit = intersect_sphere(origin, dir, scene.source(), scene.source_radius());
  if (!hit || hit->second <= 0.0) return std::nullopt;
  const double entry = std::max(hit->first, 0.0);
  if (entry >= t_end) return std::nullopt;
  return entry;
}

bool point_in_triangle(const Surface& s, const Vec3& p) {
  const Vec3& a = s.vertices[0];
  const Vec3& b = s.vertices[1];
  const Vec3& c = s.vertices[2];
  const Vec3 n = cross(b - a, c - a);
  const double tol = -1e-10 * n.squared_norm();
  return dot(cross(b - a, p - a), n) >= tol && dot(cross(c - b, p - b), n) >= tol &&
         dot(cross(a - c, p - c), n) >= tol;
}

Vec3 mirror(const Vec3& p, const Vec3& n, double offset) {
  return p - n * (2.0 * (dot(n, p) - offset));
}

struct SequenceHash {
  std::size_t operator()(const std::vector<SurfaceId>& seq) const {
    Fnv1a h;
    for (auto id : seq) h.add(id);
    return static_cast<std::size_t>(h.value());
  }
};

using SequenceSet = std::unordered_set<std::vector<SurfaceId>, SequenceHash>;

bool sequence_less(const PathRecord& a, const PathRecord& b) {
  if (a.surface_sequence.size() != b.surface_sequence.size()) {
    return a.surface_sequence.size() < b.surface_sequence.size();
  }
  return a.surface_sequence < b.surface_sequence;
}

// Runs `work(begin, end, worker)` over contiguous slices of [0, n).
template <typename Work>
void for_each_slice(std::uint64_t n, std::uint32_t workers, Work&& work) {
  workers = std::max<std::uint32_t>(1, workers);
  if (workers == 1 || n < 2) {
    work(std::uint64_t{0}, n, 0u);
    return;
  }
  std::vector<std::jthread> threads;
  threads.reserve(workers);
  for (std::uint32_t w = 0; w < workers; ++w) {
    const std::uint64_t begin = n * w / workers;
    const std::uint64_t end = n * (w + 1) / workers;
    threads.emplace_back([&work, begin, end, w] { work(begin, end, w); });
  }
}

std::vector<double> band_attenuation(const Scene& scene, double distance) {
  std::vector<double> out(scene.band_count());
  for (std::size_t b = 0; b < out.size(); ++b) {
    out[b] = std::exp(-scene.air_absorption()[b] * distance);
  }
  return out;
}

// --- direct path -----------------------------------------------------------

std::optional<PathRecord> direct_path(const Scene& scene, const SimConfig& config) {
  const double v = direct_visibility(scene, config);
  if (v <= 0.0) return std::nullopt;
  const Vec3 delta = scene.source() - scene.listener();
  const double d = delta.norm();
  PathRecord r;
  r.type = PathType::kDirect;
  r.distance = d;
  r.listener_direction = delta / d;
  r.source_direction = -r.listener_direction;
  r.speed_of_sound = scene.speed_of_sound();
  r.intensities = band_attenuation(scene, d);
  const double spread = v / (4.0 * std::numbers::pi * d * d);
  for (double& e : r.intensities) e *= spread;
  return r;
}

// --- specular discovery ----------------------------------------------------

std::vector<PathRecord> exhaustive_specular(const Scene& scene, const SimConfig& config) {
  const auto ids = scene.surface_ids();
  std::vector<std::vector<PathRecord>> per_branch(ids.size());

  for_each_slice(ids.size(), config.workers,
                 [&](std::uint64_t begin, std::uint64_t end, std::uint32_t) {
                   std::vector<SurfaceId> seq;
                   for (std::uint64_t first = begin; first < end; ++first) {
                     auto& out = per_branch[first];
                     auto recurse = [&](auto&& self) -> void {
                       if (auto r = validate_specular(scene, seq, config.eps)) {
                         out.push_back(std::move(*r));
                       }
                       if (seq.size() == config.max_specular_depth) return;
                       for (SurfaceId next : ids) {
                         if (next == seq.back()) continue;
                         seq.push_back(next);
                         self(self);
                         seq.pop_back();
                       }
                     };
                     seq.assign(1, ids[first]);
                     recurse(recurse);
                   }
                 });

  std::vector<PathRecord> all;
  for (auto& branch : per_branch) {
    std::move(branch.begin(), branch.end(), std::back_inserter(all));
  }
  return all;
}

std::vector<PathRecord> stochastic_specular(const Scene& scene, const SimConfig& config) {
  const std::uint32_t workers = std::max<std::uint32_t>(1, config.workers);
  std::vector<std::vector<std::vector<SurfaceId>>> candidates(workers);

  for_each_slice(config.n_specular, workers,
                 [&](std::uint64_t begin, std::uint64_t end, std::uint32_t w) {
                   SequenceSet seen;
                   std::vector<SurfaceId> hits;
                   for (std::uint64_t ray = begin; ray < end; ++ray) {
                     Rng rng = make_rng(config.rng_seed, kSpecularStream, ray);
                     Vec3 origin = scene.listener();
                     Vec3 dir = uniform_sphere(rng);
                     hits.clear();
                     while (true) {
                       const auto hit = ray_intersect(scene, origin, dir, config.eps);
                       const double t_end =
                           hit ? hit->distance : std::numeric_limits<double>::infinity();
                       if (!hits.empty() && sphere_entry(scene, origin, dir, t_end) &&
                           !seen.contains(hits)) {
                         seen.insert(hits);
                         candidates[w].push_back(hits);
                       }
                       if (!hit || hits.size() == config.max_specular_depth) break;
                       hits.push_back(hit->surface_id);
                       origin = hit->point;
                       dir = reflect(dir, hit->normal);
                     }
                   }
                 });

  // Merge in worker order: the first sighting of a sequence wins.
  SequenceSet seen;
  std::vector<PathRecord> out;
  for (auto& list : candidates) {
    for (auto& seq : list) {
      if (!seen.insert(seq).second) continue;
      if (auto r = validate_specular(scene, seq, config.eps)) out.push_back(std::move(*r));
    }
  }
  return out;
}

// --- diffuse rays ----------------------------------------------------------

void trace_diffuse_ray(const Scene& scene, const SimConfig& config, std::uint64_t ray,
                       std::vector<PathRecord>& out) {
  const std::size_t bands = scene.band_count();
  const double sphere_area = std::numbers::pi * scene.source_radius() * scene.source_radius();
  Rng rng = make_rng(config.rng_seed, kDiffuseStream, ray);

  std::vector<double> weight(bands, 1.0 / static_cast<double>(config.n_diffuse));
  Vec3 origin = scene.listener();
  Vec3 dir = uniform_sphere(rng);
  const Vec3 first_dir = dir;
  double travelled = 0.0;
  std::uint32_t bounces = 0;
  std::uint32_t diffuse_bounces = 0;

  while (true) {
    const auto hit = ray_intersect(scene, origin, dir, config.eps);
    const double t_end = hit ? hit->distance : std::numeric_limits<double>::infinity();
    if (diffuse_bounces >= config.min_diffuse_bounces) {
      if (const auto entry = sphere_entry(scene, origin, dir, t_end)) {
        const double d = travelled + *entry;
        PathRecord r;
        r.type = PathType::kDiffuse;
        r.distance = d;
        r.listener_direction = first_dir;
        r.source_direction = -dir;
        r.speed_of_sound = scene.speed_of_sound();
        r.intensities.resize(bands);
        for (std::size_t b = 0; b < bands; ++b) {
          r.intensities[b] = weight[b] * std::exp(-scene.air_absorption()[b] * d) / sphere_area;
        }
        out.push_back(std::move(r));
      }
    }
    if (!hit || bounces == config.max_diffuse_depth) break;

    travelled += hit->distance;
    origin = hit->point;
    ++bounces;
    const Material& m = scene.material_of(scene.surfaces()[hit->triangle]);
    bool alive = false;
    for (std::size_t b = 0; b < bands; ++b) {
      weight[b] *= 1.0 - m.absorption[b];
      alive = alive || weight[b] > 0.0;
    }
    if (!alive) break;
    const Vec3 facing = dot(dir, hit->normal) < 0.0 ? hit->normal : -hit->normal;
    if (uniform(rng) < m.scattering) {
      dir = cosine_hemisphere(facing, rng);
      ++diffuse_bounces;
    } else {
      dir = reflect(dir, hit->normal);
    }
  }
}

std::vector<PathRecord> diffuse_paths(const Scene& scene, const SimConfig& config) {
  const std::uint32_t workers = std::max<std::uint32_t>(1, config.workers);
  std::vector<std::vector<PathRecord>> buffers(workers);
  for_each_slice(config.n_diffuse, workers,
                 [&](std::uint64_t begin, std::uint64_t end, std::uint32_t w) {
                   for (std::uint64_t ray = begin; ray < end; ++ray) {
                     trace_diffuse_ray(scene, config, ray, buffers[w]);
                   }
                 });
  std::vector<PathRecord> all;
  std::size_t total = 0;
  for (const auto& b : buffers) total += b.size();
  all.reserve(total);
  for (auto& b : buffers) std::move(b.begin(), b.end(), std::back_inserter(all));
  return all;
}

const char* discovery_name(SpecularDiscovery d) {
  switch (d) {
    case SpecularDiscovery::kAuto:
      return "auto";
    case SpecularDiscovery::kExhaustive:
      return "exhaustive";
    case SpecularDiscovery::kStochastic:
      return "stochastic";
  }
  return "auto";
}

}  // namespace

void SimConfig::validate() const {
  if (max_specular_depth < 1 || max_diffuse_depth < 1) {
    throw ConfigError("reflection depths must be at least 1");
  }
  if (visibility_samples < 1) throw ConfigError("visibility_samples must be at least 1");
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
}

SimConfig parse_sim_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  SimConfig c;
  auto count = [](const json& v, const std::string& key) {
    if (!v.is_number_unsigned()) throw ConfigError(key + " must be a non-negative integer");
    return v.get<std::uint64_t>();
  };
  auto count32 = [&](const json& v, const std::string& key) {
    const auto n = count(v, key);
    if (n > std::numeric_limits<std::uint32_t>::max()) throw ConfigError(key + " is too large");
    return static_cast<std::uint32_t>(n);
  };
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "n_diffuse") {
        c.n_diffuse = count(value, key);
      } else if (key == "n_specular") {
        c.n_specular = count(value, key);
      } else if (key == "max_specular_depth") {
        c.max_specular_depth = count32(value, key);
      } else if (key == "max_diffuse_depth") {
        c.max_diffuse_depth = count32(value, key);
      } else if (key == "seed") {
        c.rng_seed = count(value, key);
      } else if (key == "visibility_samples") {
        c.visibility_samples = count32(value, key);
      } else if (key == "eps") {
        c.eps = value.get<double>();
      } else if (key == "min_diffuse_bounces") {
        c.min_diffuse_bounces = count32(value, key);
      } else if (key == "workers") {
        c.workers = count32(value, key);
      } else if (key == "specular_discovery") {
        const auto mode = value.get<std::string>();
        if (mode == "auto") {
          c.specular_discovery = SpecularDiscovery::kAuto;
        } else if (mode == "exhaustive") {
          c.specular_discovery = SpecularDiscovery::kExhaustive;
        } else if (mode == "stochastic") {
          c.specular_discovery = SpecularDiscovery::kStochastic;
        } else {
          throw ConfigError("unknown specular_discovery '" + mode + "'");
        }
      } else {
        throw ConfigError("unknown config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config schema error: ") + e.what());
  }
  c.validate();
  return c;
}

// Worker count is left out: it must not change any output byte.
std::string to_json(const SimConfig& c) {
  json j = {{"n_diffuse", c.n_diffuse},
            {"n_specular", c.n_specular},
            {"max_specular_depth", c.max_specular_depth},
            {"max_diffuse_depth", c.max_diffuse_depth},
            {"seed", c.rng_seed},
            {"visibility_samples", c.visibility_samples},
            {"eps", c.eps},
            {"specular_discovery", discovery_name(c.specular_discovery)},
            {"min_diffuse_bounces", c.min_diffuse_bounces}};
  return j.dump();
}

double direct_visibility(const Scene& scene, const SimConfig& config) {
  if (config.visibility_samples < 1) throw ConfigError("visibility_samples must be at least 1");
  const Vec3 delta = scene.source() - scene.listener();
  const double d = delta.norm();
  const double r = scene.source_radius();
  if (d <= r) return 1.0;
  const Vec3 axis = delta / d;
  const double sin_max = r / d;
  const double cos_max = std::sqrt(1.0 - sin_max * sin_max);

  Rng rng = make_rng(config.rng_seed, kVisibilityStream, 0);
  std::uint32_t clear = 0;
  for (std::uint32_t i = 0; i < config.visibility_samples; ++i) {
    const double cos_theta = 1.0 - uniform(rng) * (1.0 - cos_max);
    const double phi = 2.0 * std::numbers::pi * uniform(rng);
    const Vec3 dir = around_axis(axis, cos_theta, phi);
    const auto s = intersect_sphere(scene.listener(), dir, scene.source(), r);
    const double reach = s ? std::max(s->first, 0.0) : d * cos_theta;
    if (!segment_occluded(scene, scene.listener(), scene.listener() + dir * reach, config.eps)) {
      ++clear;
    }
  }
  return static_cast<double>(clear) / static_cast<double>(config.visibility_samples);
}

std::optional<PathRecord> validate_specular(const Scene& scene,
                                            std::span<const SurfaceId> sequence, double eps) {
  const std::size_t k = sequence.size();
  if (k == 0) return std::nullopt;
  for (std::size_t j = 0; j < k; ++j) {
    if (!scene.has_surface(sequence[j])) return std::nullopt;
    if (j > 0 && sequence[j] == sequence[j - 1]) return std::nullopt;
  }

  // images[j]: the source mirrored across sequence[k-1], ..., sequence[j].
  std::vector<std::pair<Vec3, double>> planes(k);
  for (std::size_t j = 0; j < k; ++j) planes[j] = scene.plane_of(sequence[j]);
  for (std::size_t j = 1; j < k; ++j) {
    const auto& [n0, o0] = planes[j - 1];
    const auto& [n1, o1] = planes[j];
    if (dot(n0, n1) > 1.0 - 1e-12 && std::abs(o0 - o1) < 1e-12 * std::max(1.0, std::abs(o0))) {
      return std::nullopt;  // same plane twice in a row
    }
  }
  std::vector<Vec3> images(k);
  Vec3 image = scene.source();
  for (std::size_t j = k; j-- > 0;) {
    image = mirror(image, planes[j].first, planes[j].second);
    images[j] = image;
  }

  const Aabb& box = scene.bounds();
  const double on_plane = 1e-9 * std::max({1.0, std::abs(box.lo.x), std::abs(box.lo.y),
                                           std::abs(box.lo.z), std::abs(box.hi.x),
                                           std::abs(box.hi.y), std::abs(box.hi.z)});

  std::vector<Vec3> points;
  points.reserve(k + 2);
  points.push_back(scene.listener());
  for (std::size_t j = 0; j < k; ++j) {
    const auto& [n, offset] = planes[j];
    const Vec3& from = points.back();
    const double side_from = dot(n, from) - offset;
    const double side_image = dot(n, images[j]) - offset;
    Vec3 p = from;
    if (std::abs(side_from) <= on_plane) {
      // The previous reflection sits on this plane too (an edge or corner
      // hit). Such a path crosses both planes at once; only the ordering
      // with ascending surface ids is kept so it is reported once.
      if (j == 0 || !(sequence[j - 1] < sequence[j])) return std::nullopt;
      double side_before = 0.0;
      for (std::size_t q = points.size(); q-- > 0;) {
        side_before = dot(n, points[q]) - offset;
        if (std::abs(side_before) > on_plane) break;
      }
      if (!(side_before * side_image < 0.0)) return std::nullopt;
    } else {
      if (!(side_from * side_image < 0.0)) return std::nullopt;
      const double t = side_from / (side_from - side_image);
      p = from + (images[j] - from) * t;
    }
    bool inside = false;
    for (auto tri : scene.triangles_of(sequence[j])) {
      if (point_in_triangle(scene.surfaces()[tri], p)) {
        inside = true;
        break;
      }
    }
    if (!inside) return std::nullopt;
    points.push_back(p);
  }
  points.push_back(scene.source());

  for (std::size_t j = 0; j + 1 < points.size(); ++j) {
    if (segment_occluded(scene, points[j], points[j + 1], eps)) return std::nullopt;
  }

  const double d = (images[0] - scene.listener()).norm();
  PathRecord r;
  r.type = PathType::kSpecular;
  r.distance = d;
  r.listener_direction = (points[1] - points[0]).normalized();
  r.source_direction = (points[k] - points[k + 1]).normalized();
  r.speed_of_sound = scene.speed_of_sound();
  r.surface_sequence.assign(sequence.begin(), sequence.end());
  r.intensities = band_attenuation(scene, d);
  const double spread = 1.0 / (4.0 * std::numbers::pi * d * d);
  for (std::size_t b = 0; b < r.intensities.size(); ++b) {
    double gain = spread;
    for (SurfaceId id : sequence) {
      const Material& m = scene.material_of_id(id);
      gain *= (1.0 - m.absorption[b]) * (1.0 - m.scattering);
    }
    r.intensities[b] *= gain;
  }
  return r;
}

std::vector<PathRecord> trace_records(const Scene& scene, const SimConfig& config) {
  config.validate();
  if (distance(scene.listener(), scene.source()) < 1e-9) {
    throw SceneError("listener and source coincide");
  }
  std::vector<PathRecord> out;
  if (auto direct = direct_path(scene, config)) out.push_back(std::move(*direct));

  bool exhaustive = config.specular_discovery == SpecularDiscovery::kExhaustive;
  if (config.specular_discovery == SpecularDiscovery::kAuto) {
    exhaustive = scene.shoebox_dims().has_value();
  }
  // A zero specular ray count disables specular paths in either discovery mode.
  std::vector<PathRecord> specular;
  if (config.n_specular > 0) {
    specular = exhaustive ? exhaustive_specular(scene, config) : stochastic_specular(scene, config);
  }
  std::sort(specular.begin(), specular.end(), sequence_less);
  std::move(specular.begin(), specular.end(), std::back_inserter(out));

  if (config.n_diffuse > 0) {
    auto diffuse = diffuse_paths(scene, config);
    std::move(diffuse.begin(), diffuse.end(), std::back_inserter(out));
  }
  return out;
}

PathSet trace(const Scene& scene, const SimConfig& config) {
  const auto records = trace_records(scene, config);
  PathSetMetadata meta;
  meta.scene_hash = scene.content_hash();
  meta.seed = config.rng_seed;
  meta.sim_config = to_json(config);
  meta.band_centers_hz.assign(scene.band_centers().begin(), scene.band_centers().end());
  meta.source_position = scene.source();
  meta.listener_position = scene.listener();
  return to_path_set(records, scene.band_count(), std::move(meta));
}

}  // namespace roomsir
