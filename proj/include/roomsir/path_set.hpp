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
#include <span>
#include <string>
#include <vector>

#include "roomsir/geometry.hpp"
#include "roomsir/vec3.hpp"

namespace roomsir {

enum class PathType : std::int8_t {
  kDirect = 0,
  kSpecular = 1,
  kDiffuse = 2,
  kDiffraction = 3,  // reserved; never produced
};

const char* to_string(PathType type);

// One validated propagation path in full double precision, as produced by the
// tracer. Energies are relative to unit source emission per unit receiver
// area; the direct path at distance d carries 1/(4*pi*d^2) per band.
struct PathRecord {
  std::int32_t source_index = 0;
  PathType type = PathType::kDirect;
  double distance = 0.0;
  Vec3 listener_direction;  // direction of arrival, pointing away from the listener
  Vec3 source_direction;    // from the source toward its adjacent segment
  double relative_speed = 0.0;
  double speed_of_sound = kDefaultSpeedOfSound;
  std::vector<double> intensities;  // one energy per band
  // Reflecting surfaces, listener side first. Empty for direct and diffuse paths.
  std::vector<SurfaceId> surface_sequence;

  double total_energy() const;
};

struct PathSetMetadata {
  std::uint64_t scene_hash = 0;
  std::uint64_t seed = 0;
  std::string sim_config = "{}";   // JSON echo of the tracer configuration
  std::string filter_policy = "none";
  std::vector<double> band_centers_hz;
  Vec3 source_position;
  Vec3 listener_position;

  bool operator==(const PathSetMetadata&) const = default;
};

// Column-oriented path collection, stored at file precision (float32) so a
// write/read cycle reproduces every value bit for bit. Direction columns are
// row-major [N,3]; intensities are row-major [N,B].
class PathSet {
 public:
  PathSet() = default;
  explicit PathSet(std::size_t band_count) : bands_(band_count) {}

  // Builds a set from raw columns, validating that every length agrees.
  static PathSet from_columns(std::size_t band_count, std::vector<std::int32_t> source_index,
                              std::vector<std::int8_t> path_type, std::vector<float> distance,
                              std::vector<float> listener_dir, std::vector<float> source_dir,
                              std::vector<float> relative_speed, std::vector<float> speed_of_sound,
                              std::vector<float> intensities, PathSetMetadata metadata = {});

  std::size_t size() const { return distance_.size(); }
  bool empty() const { return distance_.empty(); }
  std::size_t band_count() const { return bands_; }

  void reserve(std::size_t n);
  void push_back(const PathRecord& r);

  std::span<const std::int32_t> source_index() const { return source_index_; }
  std::span<const std::int8_t> path_type() const { return path_type_; }
  std::span<const float> distance() const { return distance_; }
  std::span<const float> listener_dir() const { return listener_dir_; }
  std::span<const float> source_dir() const { return source_dir_; }
  std::span<const float> relative_speed() const { return relative_speed_; }
  std::span<const float> speed_of_sound() const { return speed_of_sound_; }
  std::span<const float> intensities() const { return intensities_; }
  std::span<const float> intensities(std::size_t row) const {
    return std::span<const float>(intensities_).subspan(row * bands_, bands_);
  }
  Vec3 listener_direction(std::size_t row) const;
  Vec3 source_direction(std::size_t row) const;

  // Sum over bands, accumulated in double.
  double total_energy(std::size_t row) const;
  double total_energy() const;
  std::size_t count(PathType type) const;

  // Rows `rows` in the given order; metadata is copied unchanged.
  PathSet select(std::span<const std::size_t> rows) const;

  PathSetMetadata& metadata() { return metadata_; }
  const PathSetMetadata& metadata() const { return metadata_; }

  // Bit-level equality of every column and the metadata.
  bool identical(const PathSet& other) const;

 private:
  std::size_t bands_ = 0;
  std::vector<std::int32_t> source_index_;
  std::vector<std::int8_t> path_type_;
  std::vector<float> distance_;
  std::vector<float> listener_dir_;
  std::vector<float> source_dir_;
  std::vector<float> relative_speed_;
  std::vector<float> speed_of_sound_;
  std::vector<float> intensities_;
  PathSetMetadata metadata_;
};

PathSet to_path_set(std::span<const PathRecord> records, std::size_t band_count,
                    PathSetMetadata metadata = {});

// Named contiguous views over a PathSet, shaped the way array-oriented
// consumers (bindings, notebooks) expect them. No values are copied.
struct ArrayView {
  std::string name;
  const void* data = nullptr;
  char dtype = 'f';  // 'i' int32, 'b' int8, 'f' float32
  std::vector<std::size_t> shape;
};

std::vector<ArrayView> path_arrays(const PathSet& paths);

}  // namespace roomsir
