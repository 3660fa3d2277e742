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

#include "roomsir/path_set.hpp"

#include <cstring>

#include "roomsir/error.hpp"

namespace roomsir {

const char* to_string(PathType type) {
  switch (type) {
    case PathType::kDirect:
      return "direct";
    case PathType::kSpecular:
      return "specular";
    case PathType::kDiffuse:
      return "diffuse";
    case PathType::kDiffraction:
      return "diffraction";
  }
  return "unknown";
}

double PathRecord::total_energy() const {
  double sum = 0.0;
  for (double e : intensities) sum += e;
  return sum;
}

PathSet PathSet::from_columns(std::size_t band_count, std::vector<std::int32_t> source_index,
                              std::vector<std::int8_t> path_type, std::vector<float> distance,
                              std::vector<float> listener_dir, std::vector<float> source_dir,
                              std::vector<float> relative_speed, std::vector<float> speed_of_sound,
                              std::vector<float> intensities, PathSetMetadata metadata) {
  const std::size_t n = distance.size();
  if (source_index.size() != n || path_type.size() != n || relative_speed.size() != n ||
      speed_of_sound.size() != n) {
    throw SchemaError("path columns have mismatched lengths");
  }
  if (listener_dir.size() != 3 * n || source_dir.size() != 3 * n) {
    throw SchemaError("direction columns must have shape [N,3]");
  }
  if (intensities.size() != band_count * n) {
    throw SchemaError("intensity column must have shape [N,B]");
  }
  PathSet p(band_count);
  p.source_index_ = std::move(source_index);
  p.path_type_ = std::move(path_type);
  p.distance_ = std::move(distance);
  p.listener_dir_ = std::move(listener_dir);
  p.source_dir_ = std::move(source_dir);
  p.relative_speed_ = std::move(relative_speed);
  p.speed_of_sound_ = std::move(speed_of_sound);
  p.intensities_ = std::move(intensities);
  p.metadata_ = std::move(metadata);
  return p;
}

void PathSet::reserve(std::size_t n) {
  source_index_.reserve(n);
  path_type_.reserve(n);
  distance_.reserve(n);
  listener_dir_.reserve(3 * n);
  source_dir_.reserve(3 * n);
  relative_speed_.reserve(n);
  speed_of_sound_.reserve(n);
  intensities_.reserve(bands_ * n);
}

void PathSet::push_back(const PathRecord& r) {
  if (r.intensities.size() != bands_) {
    throw SchemaError("path record has " + std::to_string(r.intensities.size()) +
                      " bands, path set expects " + std::to_string(bands_));
  }
  source_index_.push_back(r.source_index);
  path_type_.push_back(static_cast<std::int8_t>(r.type));
  distance_.push_back(static_cast<float>(r.distance));
  auto append = [](std::vector<float>& col, const Vec3& v) {
    col.insert(col.end(),
               {static_cast<float>(v.x), static_cast<float>(v.y), static_cast<float>(v.z)});
  };
  append(listener_dir_, r.listener_direction);
  append(source_dir_, r.source_direction);
  relative_speed_.push_back(static_cast<float>(r.relative_speed));
  speed_of_sound_.push_back(static_cast<float>(r.speed_of_sound));
  for (double e : r.intensities) intensities_.push_back(static_cast<float>(e));
}

Vec3 PathSet::listener_direction(std::size_t row) const {
  return {listener_dir_[3 * row], listener_dir_[3 * row + 1], listener_dir_[3 * row + 2]};
}

Vec3 PathSet::source_direction(std::size_t row) const {
  return {source_dir_[3 * row], source_dir_[3 * row + 1], source_dir_[3 * row + 2]};
}

double PathSet::total_energy(std::size_t row) const {
  double sum = 0.0;
  for (float e : intensities(row)) sum += e;
  return sum;
}

double PathSet::total_energy() const {
  double sum = 0.0;
  for (std::size_t i = 0; i < size(); ++i) sum += total_energy(i);
  return sum;
}

std::size_t PathSet::count(PathType type) const {
  std::size_t n = 0;
  for (auto t : path_type_) n += (t == static_cast<std::int8_t>(type)) ? 1 : 0;
  return n;
}

PathSet PathSet::select(std::span<const std::size_t> rows) const {
  PathSet out(bands_);
  out.reserve(rows.size());
  for (std::size_t r : rows) {
    out.source_index_.push_back(source_index_[r]);
    out.path_type_.push_back(path_type_[r]);
    out.distance_.push_back(distance_[r]);
    out.listener_dir_.insert(out.listener_dir_.end(), listener_dir_.begin() + 3 * r,
                             listener_dir_.begin() + 3 * r + 3);
    out.source_dir_.insert(out.source_dir_.end(), source_dir_.begin() + 3 * r,
                           source_dir_.begin() + 3 * r + 3);
    out.relative_speed_.push_back(relative_speed_[r]);
    out.speed_of_sound_.push_back(speed_of_sound_[r]);
    const auto band = intensities(r);
    out.intensities_.insert(out.intensities_.end(), band.begin(), band.end());
  }
  out.metadata_ = metadata_;
  return out;
}

namespace {

template <typename T>
bool same_bits(const std::vector<T>& a, const std::vector<T>& b) {
  return a.size() == b.size() && (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0);
}

}  // namespace

bool PathSet::identical(const PathSet& o) const {
  return bands_ == o.bands_ && same_bits(source_index_, o.source_index_) &&
         same_bits(path_type_, o.path_type_) && same_bits(distance_, o.distance_) &&
         same_bits(listener_dir_, o.listener_dir_) && same_bits(source_dir_, o.source_dir_) &&
         same_bits(relative_speed_, o.relative_speed_) &&
         same_bits(speed_of_sound_, o.speed_of_sound_) && same_bits(intensities_, o.intensities_) &&
         metadata_ == o.metadata_;
}

PathSet to_path_set(std::span<const PathRecord> records, std::size_t band_count,
                    PathSetMetadata metadata) {
  PathSet set(band_count);
  set.reserve(records.size());
  for (const auto& r : records) set.push_back(r);
  set.metadata() = std::move(metadata);
  return set;
}

std::vector<ArrayView> path_arrays(const PathSet& p) {
  const std::size_t n = p.size();
  return {
      {"source_indices", p.source_index().data(), 'i', {n}},
      {"path_types", p.path_type().data(), 'b', {n}},
      {"distances", p.distance().data(), 'f', {n}},
      {"listener_directions", p.listener_dir().data(), 'f', {n, 3}},
      {"source_directions", p.source_dir().data(), 'f', {n, 3}},
      {"relative_speeds", p.relative_speed().data(), 'f', {n}},
      {"speeds_of_sound", p.speed_of_sound().data(), 'f', {n}},
      {"intensities", p.intensities().data(), 'f', {n, p.band_count()}},
  };
}

}  // namespace roomsir
