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


#include "roomsir/pathstore.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "roomsir/error.hpp"
#include "roomsir/parquet.hpp"

namespace roomsir {

using json = nlohmann::json;

FilterPolicy FilterPolicy::top_count(std::uint64_t n) {
  return {Kind::kTopCount, static_cast<double>(n)};
}

FilterPolicy FilterPolicy::top_fraction(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw ConfigError("top fraction must be in (0, 1]");
  return {Kind::kTopFraction, p};
}

FilterPolicy FilterPolicy::energy_coverage(double q) {
  if (!(q > 0.0 && q <= 1.0)) throw ConfigError("energy coverage must be in (0, 1]");
  return {Kind::kEnergyCoverage, q};
}

std::string FilterPolicy::to_string() const {
  std::ostringstream s;
  s.precision(17);
  switch (kind) {
    case Kind::kTopCount:
      s << "top_count(" << static_cast<std::uint64_t>(value) << ")";
      break;
    case Kind::kTopFraction:
      s << "top_fraction(" << value << ")";
      break;
    case Kind::kEnergyCoverage:
      s << "energy_coverage(" << value << ")";
      break;
  }
  return s.str();
}

std::vector<std::size_t> energy_ranking(const PathSet& paths) {
  std::vector<double> total(paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) total[i] = paths.total_energy(i);
  std::vector<std::size_t> order(paths.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return total[a] > total[b]; });
  return order;
}

namespace {

std::size_t coverage_count(const PathSet& paths, const std::vector<std::size_t>& order, double q) {
  double total = 0.0;
  for (std::size_t r : order) total += paths.total_energy(r);
  const double target = q * total;
  double cum = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    cum += paths.total_energy(order[k]);
    if (cum >= target) return k + 1;
  }
  return order.size();
}

std::size_t kept(const PathSet& paths, const std::vector<std::size_t>& order,
                 const FilterPolicy& policy) {
  const std::size_t n = paths.size();
  switch (policy.kind) {
    case FilterPolicy::Kind::kTopCount:
      return static_cast<std::size_t>(std::min<double>(policy.value, static_cast<double>(n)));
    case FilterPolicy::Kind::kTopFraction:
      return std::min(n, static_cast<std::size_t>(std::ceil(policy.value * static_cast<double>(n))));
    case FilterPolicy::Kind::kEnergyCoverage:
      return n == 0 ? 0 : coverage_count(paths, order, policy.value);
  }
  return n;
}

}  // namespace

std::size_t filtered_count(const PathSet& paths, const FilterPolicy& policy) {
  return kept(paths, energy_ranking(paths), policy);
}

PathSet filter_paths(const PathSet& paths, const FilterPolicy& policy) {
  const auto order = energy_ranking(paths);
  const std::size_t n = kept(paths, order, policy);
  PathSet out = paths.select(std::span<const std::size_t>(order).first(n));
  std::string& applied = out.metadata().filter_policy;
  applied = (applied.empty() || applied == "none") ? policy.to_string()
                                                   : applied + "," + policy.to_string();
  return out;
}

std::vector<double> cumulative_energy_curve(const PathSet& paths) {
  const auto order = energy_ranking(paths);
  std::vector<double> curve(order.size());
  double cum = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    cum += paths.total_energy(order[k]);
    curve[k] = cum;
  }
  if (!(cum > 0.0)) throw Error("no energy to rank");
  for (double& v : curve) v /= cum;
  curve.back() = 1.0;
  return curve;
}

// --- persistence -------------------------------------------------------------

namespace {

constexpr std::array<const char*, 3> kAxes{"x", "y", "z"};

parquet::Column float_column(std::string name, std::span<const float> data, std::size_t stride,
                             std::size_t offset) {
  parquet::Column c;
  c.name = std::move(name);
  c.type = parquet::ColumnType::kFloat;
  const std::size_t n = stride == 0 ? 0 : data.size() / stride;
  c.floats.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const float v = data[i * stride + offset];
    if (!std::isfinite(v)) {
      throw SchemaError("non-finite value in column '" + c.name + "' at row " + std::to_string(i));
    }
    c.floats.push_back(v);
  }
  return c;
}

json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw SchemaError("position metadata must have 3 entries");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

std::string encode_paths(const PathSet& paths) {
  const std::size_t bands = paths.band_count();
  parquet::Table t;

  parquet::Column source_index{"source_index", parquet::ColumnType::kInt32, {}, {}};
  source_index.ints.assign(paths.source_index().begin(), paths.source_index().end());
  t.columns.push_back(std::move(source_index));
  parquet::Column type{"path_type", parquet::ColumnType::kInt8, {}, {}};
  type.ints.assign(paths.path_type().begin(), paths.path_type().end());
  t.columns.push_back(std::move(type));

  t.columns.push_back(float_column("distance_m", paths.distance(), 1, 0));
  for (std::size_t a = 0; a < 3; ++a) {
    t.columns.push_back(
        float_column(std::string("listener_dir_") + kAxes[a], paths.listener_dir(), 3, a));
  }
  for (std::size_t a = 0; a < 3; ++a) {
    t.columns.push_back(
        float_column(std::string("source_dir_") + kAxes[a], paths.source_dir(), 3, a));
  }
  t.columns.push_back(float_column("relative_speed_mps", paths.relative_speed(), 1, 0));
  t.columns.push_back(float_column("speed_of_sound_mps", paths.speed_of_sound(), 1, 0));
  for (std::size_t b = 0; b < bands; ++b) {
    t.columns.push_back(float_column("band_" + std::to_string(b), paths.intensities(), bands, b));
  }

  const PathSetMetadata& m = paths.metadata();
  t.metadata = {
      {"format_version", std::string(kPathFileFormatVersion)},
      {"num_bands", std::to_string(bands)},
      {"band_centers_hz", json(m.band_centers_hz).dump()},
      {"scene_hash", std::to_string(m.scene_hash)},
      {"seed", std::to_string(m.seed)},
      {"filter_policy", m.filter_policy},
      {"source_position", vec_json(m.source_position).dump()},
      {"listener_position", vec_json(m.listener_position).dump()},
      {"sim_config", m.sim_config},
  };
  return parquet::encode(t);
}

PathSet decode_paths(std::string_view bytes) {
  const parquet::Table t = parquet::decode(bytes);
  auto meta = [&](std::string_view key) -> const std::string& {
    const std::string* v = t.meta(key);
    if (v == nullptr) throw SchemaError("path file lacks metadata key '" + std::string(key) + "'");
    return *v;
  };
  const std::string& version = meta("format_version");
  if (version != kPathFileFormatVersion) {
    throw SchemaError("path file format version " + version + " is not supported (expected " +
                      std::string(kPathFileFormatVersion) + ")");
  }

  std::size_t bands = 0;
  PathSetMetadata m;
  try {
    bands = std::stoul(meta("num_bands"));
    m.band_centers_hz = json::parse(meta("band_centers_hz")).get<std::vector<double>>();
    m.scene_hash = std::stoull(meta("scene_hash"));
    m.seed = std::stoull(meta("seed"));
    m.source_position = vec_from(json::parse(meta("source_position")));
    m.listener_position = vec_from(json::parse(meta("listener_position")));
  } catch (const SchemaError&) {
    throw;
  } catch (const std::exception& e) {
    throw SchemaError(std::string("malformed path file metadata: ") + e.what());
  }
  m.filter_policy = meta("filter_policy");
  if (const std::string* cfg = t.meta("sim_config")) m.sim_config = *cfg;

  auto column = [&](const std::string& name, parquet::ColumnType type) -> const parquet::Column& {
    const parquet::Column* c = t.find(name);
    if (c == nullptr) throw SchemaError("schema mismatch: missing column '" + name + "'");
    if (c->type != type) throw SchemaError("schema mismatch: column '" + name + "' has wrong type");
    return *c;
  };
  const std::size_t expected_columns = 11 + bands;
  if (t.columns.size() != expected_columns) {
    for (std::size_t b = 0; b < bands; ++b) column("band_" + std::to_string(b), parquet::ColumnType::kFloat);
    throw SchemaError("schema mismatch: " + std::to_string(t.columns.size()) +
                      " columns, expected " + std::to_string(expected_columns));
  }

  const std::size_t n = t.rows();
  const auto& src = column("source_index", parquet::ColumnType::kInt32).ints;
  const auto& typ = column("path_type", parquet::ColumnType::kInt8).ints;
  std::vector<std::int8_t> types(typ.begin(), typ.end());
  auto floats = [&](const std::string& name) -> const std::vector<float>& {
    return column(name, parquet::ColumnType::kFloat).floats;
  };
  auto interleave = [&](const std::string& prefix) {
    std::vector<float> out(3 * n);
    for (std::size_t a = 0; a < 3; ++a) {
      const auto& c = floats(prefix + kAxes[a]);
      for (std::size_t i = 0; i < n; ++i) out[3 * i + a] = c[i];
    }
    return out;
  };
  std::vector<float> intensities(bands * n);
  for (std::size_t b = 0; b < bands; ++b) {
    const auto& c = floats("band_" + std::to_string(b));
    for (std::size_t i = 0; i < n; ++i) intensities[i * bands + b] = c[i];
  }
  return PathSet::from_columns(bands, src, std::move(types), floats("distance_m"),
                               interleave("listener_dir_"), interleave("source_dir_"),
                               floats("relative_speed_mps"), floats("speed_of_sound_mps"),
                               std::move(intensities), std::move(m));
}

WriteStats write_paths(const PathSet& paths, const std::filesystem::path& file) {
  const auto start = std::chrono::steady_clock::now();
  const std::string image = encode_paths(paths);
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + file.string() + "' for writing");
  out.write(image.data(), static_cast<std::streamsize>(image.size()));
  out.close();
  if (!out) throw IoError("failed writing '" + file.string() + "'");
  const auto stop = std::chrono::steady_clock::now();
  return {image.size(), std::chrono::duration<double>(stop - start).count()};
}

PathSet read_paths(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open '" + file.string() + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_paths(bytes);
}

}  // namespace roomsir
