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

// Minimal Apache Parquet codec: flat schema of required INT32/INT8/FLOAT
// columns, PLAIN encoding, no compression, data page v1. Enough to exchange
// path tables with Arrow-based tools; not a general Parquet implementation.

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace roomsir::parquet {

enum class ColumnType { kInt32, kInt8, kFloat };

struct Column {
  std::string name;
  ColumnType type = ColumnType::kFloat;
  std::vector<std::int32_t> ints;  // kInt32 and kInt8
  std::vector<float> floats;       // kFloat

  std::size_t size() const { return type == ColumnType::kFloat ? floats.size() : ints.size(); }
};

struct Table {
  std::vector<Column> columns;
  std::vector<std::pair<std::string, std::string>> metadata;  // file key/value metadata

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
  const Column* find(std::string_view name) const;
  const std::string* meta(std::string_view key) const;
};

// Serializes `table` into a complete Parquet file image. All columns must
// have the same length. A table with zero rows is written with no row groups.
std::string encode(const Table& table);

// Parses a file image. Throws SchemaError for malformed input or for
// features outside the subset above (compression, dictionary pages, ...).
Table decode(std::string_view bytes);

}  // namespace roomsir::parquet
