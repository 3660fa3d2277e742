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
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "roomsir/path_set.hpp"

namespace roomsir {

// Which paths survive energy-based filtering. Paths are ranked by total
// energy over all bands, highest first, ties by original index.
struct FilterPolicy {
  enum class Kind { kTopCount, kTopFraction, kEnergyCoverage };

  Kind kind = Kind::kTopFraction;
  double value = 1.0;  // path count, fraction of paths, or fraction of energy

  static FilterPolicy top_count(std::uint64_t n);
  static FilterPolicy top_fraction(double p);        // 0 < p <= 1
  static FilterPolicy energy_coverage(double q);     // 0 < q <= 1

  // "top_count(100)", "top_fraction(0.1)", "energy_coverage(0.95)".
  std::string to_string() const;
};

// Row indices in descending total energy order.
std::vector<std::size_t> energy_ranking(const PathSet& paths);

// Number of top-ranked rows the policy keeps.
std::size_t filtered_count(const PathSet& paths, const FilterPolicy& policy);

// Top-ranked paths under `policy`, in rank order. Every column and the
// metadata are carried over; the policy is appended to metadata.filter_policy.
PathSet filter_paths(const PathSet& paths, const FilterPolicy& policy);

// Cumulative fraction of total energy held by the top k paths, k = 1..N.
// Throws Error("no energy to rank") when every path carries zero energy.
std::vector<double> cumulative_energy_curve(const PathSet& paths);

// --- columnar persistence --------------------------------------------------

inline constexpr std::string_view kPathFileFormatVersion = "1";

struct WriteStats {
  std::uint64_t bytes = 0;
  double seconds = 0.0;
};

// Parquet image of `paths`. Throws SchemaError on NaN or infinite values.
std::string encode_paths(const PathSet& paths);
PathSet decode_paths(std::string_view bytes);

WriteStats write_paths(const PathSet& paths, const std::filesystem::path& file);
PathSet read_paths(const std::filesystem::path& file);

}  // namespace roomsir
