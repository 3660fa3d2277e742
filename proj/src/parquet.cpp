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


#include "roomsir/parquet.hpp"

#include <cstring>
#include <limits>

#include "roomsir/error.hpp"

namespace roomsir::parquet {

namespace {

constexpr std::string_view kMagic = "PAR1";

// Thrift compact protocol type codes.
enum CType : std::uint8_t {
  kStop = 0,
  kTrue = 1,
  kFalse = 2,
  kByte = 3,
  kI16 = 4,
  kI32 = 5,
  kI64 = 6,
  kDouble = 7,
  kBinary = 8,
  kList = 9,
  kSet = 10,
  kMap = 11,
  kStruct = 12,
};

// Parquet enum values used here.
constexpr std::int32_t kTypeInt32 = 1;
constexpr std::int32_t kTypeFloat = 4;
constexpr std::int32_t kRequired = 0;
constexpr std::int32_t kConvertedInt8 = 15;
constexpr std::int32_t kEncodingPlain = 0;
constexpr std::int32_t kEncodingRle = 3;
constexpr std::int32_t kCodecUncompressed = 0;
constexpr std::int32_t kPageData = 0;

[[noreturn]] void corrupt(const std::string& what) {
  throw SchemaError("corrupt parquet file: " + what);
}

class CompactWriter {
 public:
  explicit CompactWriter(std::string& out) : out_(out) {}

  void i32(std::int16_t id, std::int32_t v) {
    field(id, kI32);
    varint(zigzag(v));
  }
  void i64(std::int16_t id, std::int64_t v) {
    field(id, kI64);
    varint(zigzag(v));
  }
  void byte(std::int16_t id, std::int8_t v) {
    field(id, kByte);
    out_.push_back(static_cast<char>(v));
  }
  void boolean(std::int16_t id, bool v) { field(id, v ? kTrue : kFalse); }
  void binary(std::int16_t id, std::string_view s) {
    field(id, kBinary);
    raw_binary(s);
  }

  void begin_struct(std::int16_t id) {
    field(id, kStruct);
    push();
  }
  void end_struct() {
    out_.push_back(static_cast<char>(kStop));
    pop();
  }

  void begin_list(std::int16_t id, CType element, std::size_t n) {
    field(id, kList);
    if (n < 15) {
      out_.push_back(static_cast<char>((n << 4) | element));
    } else {
      out_.push_back(static_cast<char>(0xF0 | element));
      varint(n);
    }
  }
  // Struct elements inside a list: no field header.
  void begin_element() { push(); }
  void end_element() { end_struct(); }
  void element_i32(std::int32_t v) { varint(zigzag(v)); }
  void element_binary(std::string_view s) { raw_binary(s); }

  // Top-level struct that is not a field of anything.
  void begin_message() { push(); }
  void end_message() { end_struct(); }

 private:
  static std::uint64_t zigzag(std::int64_t v) {
    return (static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63);
  }
  void varint(std::uint64_t v) {
    while (v >= 0x80) {
      out_.push_back(static_cast<char>((v & 0x7F) | 0x80));
      v >>= 7;
    }
    out_.push_back(static_cast<char>(v));
  }
  void raw_binary(std::string_view s) {
    varint(s.size());
    out_.append(s);
  }
  void field(std::int16_t id, CType type) {
    const int delta = id - last_;
    if (delta > 0 && delta <= 15) {
      out_.push_back(static_cast<char>((delta << 4) | type));
    } else {
      out_.push_back(static_cast<char>(type));
      varint(zigzag(id));
    }
    last_ = id;
  }
  void push() {
    stack_.push_back(last_);
    last_ = 0;
  }
  void pop() {
    last_ = stack_.back();
    stack_.pop_back();
  }

  std::string& out_;
  std::int16_t last_ = 0;
  std::vector<std::int16_t> stack_;
};

class CompactReader {
 public:
  CompactReader(const std::uint8_t* p, const std::uint8_t* end) : p_(p), end_(end) {}

  struct Field {
    std::uint8_t type;
    std::int16_t id;
    bool bool_value;
  };

  const std::uint8_t* position() const { return p_; }

  void begin_struct() {
    stack_.push_back(last_);
    last_ = 0;
  }
  void end_struct() {
    last_ = stack_.back();
    stack_.pop_back();
  }

  // Next field header of the current struct; type kStop ends the struct.
  Field field() {
    const std::uint8_t b = byte();
    const std::uint8_t type = b & 0x0F;
    if (type == kStop) return {kStop, 0, false};
    const int delta = b >> 4;
    std::int16_t id = 0;
    if (delta != 0) {
      id = static_cast<std::int16_t>(last_ + delta);
    } else {
      id = static_cast<std::int16_t>(unzigzag(varint()));
    }
    last_ = id;
    return {type, id, type == kTrue};
  }

  std::pair<std::uint8_t, std::size_t> list_header() {
    const std::uint8_t b = byte();
    std::size_t n = b >> 4;
    if (n == 15) n = static_cast<std::size_t>(varint());
    if (n > static_cast<std::size_t>(end_ - p_)) corrupt("list length out of range");
    return {static_cast<std::uint8_t>(b & 0x0F), n};
  }

  std::int64_t integer() { return unzigzag(varint()); }
  std::int32_t i32() {
    const auto v = integer();
    if (v < std::numeric_limits<std::int32_t>::min() ||
        v > std::numeric_limits<std::int32_t>::max()) {
      corrupt("i32 out of range");
    }
    return static_cast<std::int32_t>(v);
  }
  std::string binary() {
    const auto n = varint();
    if (n > static_cast<std::uint64_t>(end_ - p_)) corrupt("string runs past the end");
    std::string s(reinterpret_cast<const char*>(p_), static_cast<std::size_t>(n));
    p_ += n;
    return s;
  }

  void skip(std::uint8_t type, int depth = 0) {
    if (depth > 64) corrupt("nesting too deep");
    switch (type) {
      case kTrue:
      case kFalse:
        return;
      case kByte:
        byte();
        return;
      case kI16:
      case kI32:
      case kI64:
        varint();
        return;
      case kDouble:
        advance(8);
        return;
      case kBinary:
        binary();
        return;
      case kList:
      case kSet: {
        const auto [elem, n] = list_header();
        for (std::size_t i = 0; i < n; ++i) skip_element(elem, depth + 1);
        return;
      }
      case kMap: {
        const auto n = varint();
        if (n == 0) return;
        const std::uint8_t kv = byte();
        for (std::uint64_t i = 0; i < n; ++i) {
          skip_element(kv >> 4, depth + 1);
          skip_element(kv & 0x0F, depth + 1);
        }
        return;
      }
      case kStruct: {
        begin_struct();
        while (true) {
          const Field f = field();
          if (f.type == kStop) break;
          skip(f.type, depth + 1);
        }
        end_struct();
        return;
      }
      default:
        corrupt("unknown thrift type " + std::to_string(type));
    }
  }

 private:
  void skip_element(std::uint8_t type, int depth) {
    // Booleans inside containers occupy one byte each.
    if (type == kTrue || type == kFalse) {
      byte();
    } else {
      skip(type, depth);
    }
  }
  std::uint8_t byte() {
    if (p_ >= end_) corrupt("unexpected end of metadata");
    return *p_++;
  }
  void advance(std::size_t n) {
    if (n > static_cast<std::size_t>(end_ - p_)) corrupt("unexpected end of metadata");
    p_ += n;
  }
  std::uint64_t varint() {
    std::uint64_t v = 0;
    for (int shift = 0; shift < 64; shift += 7) {
      const std::uint8_t b = byte();
      v |= static_cast<std::uint64_t>(b & 0x7F) << shift;
      if ((b & 0x80) == 0) return v;
    }
    corrupt("varint too long");
  }
  static std::int64_t unzigzag(std::uint64_t v) {
    return static_cast<std::int64_t>(v >> 1) ^ -static_cast<std::int64_t>(v & 1);
  }

  const std::uint8_t* p_;
  const std::uint8_t* end_;
  std::int16_t last_ = 0;
  std::vector<std::int16_t> stack_;
};

std::int32_t physical_type(ColumnType t) {
  return t == ColumnType::kFloat ? kTypeFloat : kTypeInt32;
}

void append_le32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t read_le32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::string plain_values(const Column& c) {
  std::string out;
  out.reserve(4 * c.size());
  if (c.type == ColumnType::kFloat) {
    for (float f : c.floats) {
      std::uint32_t bits;
      std::memcpy(&bits, &f, 4);
      append_le32(out, bits);
    }
  } else {
    for (std::int32_t v : c.ints) append_le32(out, static_cast<std::uint32_t>(v));
  }
  return out;
}

struct ChunkInfo {
  std::int64_t offset;
  std::int64_t size;
};

}  // namespace

const Column* Table::find(std::string_view name) const {
  for (const auto& c : columns) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

const std::string* Table::meta(std::string_view key) const {
  for (const auto& [k, v] : metadata) {
    if (k == key) return &v;
  }
  return nullptr;
}

std::string encode(const Table& table) {
  const std::size_t rows = table.rows();
  for (const auto& c : table.columns) {
    if (c.size() != rows) throw SchemaError("column '" + c.name + "' length differs");
    if (c.type == ColumnType::kInt8) {
      for (auto v : c.ints) {
        if (v < -128 || v > 127) throw SchemaError("column '" + c.name + "' exceeds int8 range");
      }
    }
  }

  std::string out(kMagic);
  std::vector<ChunkInfo> chunks;
  if (rows > 0) {
    for (const auto& c : table.columns) {
      const std::string values = plain_values(c);
      const auto offset = static_cast<std::int64_t>(out.size());
      CompactWriter w(out);
      w.begin_message();
      w.i32(1, kPageData);
      w.i32(2, static_cast<std::int32_t>(values.size()));
      w.i32(3, static_cast<std::int32_t>(values.size()));
      w.begin_struct(5);
      w.i32(1, static_cast<std::int32_t>(rows));
      w.i32(2, kEncodingPlain);
      w.i32(3, kEncodingRle);
      w.i32(4, kEncodingRle);
      w.end_struct();
      w.end_message();
      out += values;
      chunks.push_back({offset, static_cast<std::int64_t>(out.size()) - offset});
    }
  }

  const auto footer_start = out.size();
  CompactWriter w(out);
  w.begin_message();
  w.i32(1, 1);
  w.begin_list(2, kStruct, table.columns.size() + 1);
  w.begin_element();
  w.binary(4, "schema");
  w.i32(5, static_cast<std::int32_t>(table.columns.size()));
  w.end_element();
  for (const auto& c : table.columns) {
    w.begin_element();
    w.i32(1, physical_type(c.type));
    w.i32(3, kRequired);
    w.binary(4, c.name);
    if (c.type == ColumnType::kInt8) {
      w.i32(6, kConvertedInt8);
      w.begin_struct(10);  // LogicalType union
      w.begin_struct(10);  // INTEGER
      w.byte(1, 8);
      w.boolean(2, true);
      w.end_struct();
      w.end_struct();
    }
    w.end_element();
  }
  w.i64(3, static_cast<std::int64_t>(rows));
  w.begin_list(4, kStruct, rows > 0 ? 1 : 0);
  if (rows > 0) {
    std::int64_t total = 0;
    for (const auto& ch : chunks) total += ch.size;
    w.begin_element();
    w.begin_list(1, kStruct, table.columns.size());
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
      const Column& c = table.columns[i];
      w.begin_element();
      w.i64(2, chunks[i].offset);
      w.begin_struct(3);
      w.i32(1, physical_type(c.type));
      w.begin_list(2, kI32, 2);
      w.element_i32(kEncodingPlain);
      w.element_i32(kEncodingRle);
      w.begin_list(3, kBinary, 1);
      w.element_binary(c.name);
      w.i32(4, kCodecUncompressed);
      w.i64(5, static_cast<std::int64_t>(rows));
      w.i64(6, chunks[i].size);
      w.i64(7, chunks[i].size);
      w.i64(9, chunks[i].offset);
      w.end_struct();
      w.end_element();
    }
    w.i64(2, total);
    w.i64(3, static_cast<std::int64_t>(rows));
    w.end_element();
  }
  if (!table.metadata.empty()) {
    w.begin_list(5, kStruct, table.metadata.size());
    for (const auto& [k, v] : table.metadata) {
      w.begin_element();
      w.binary(1, k);
      w.binary(2, v);
      w.end_element();
    }
  }
  w.binary(6, "roomsir version 1.0.0");
  w.end_message();
  append_le32(out, static_cast<std::uint32_t>(out.size() - footer_start));
  out += kMagic;
  return out;
}

namespace {

struct SchemaColumn {
  std::string name;
  std::int32_t type = -1;
  std::int32_t repetition = kRequired;
  std::int32_t converted = -1;
  std::int32_t logical_bits = 0;
  bool is_group = false;
};

struct ChunkMeta {
  std::int32_t type = -1;
  std::int32_t codec = 0;
  std::int64_t num_values = 0;
  std::int64_t data_page_offset = -1;
  std::int64_t dictionary_page_offset = -1;
  std::vector<std::string> path;
};

void parse_int_type(CompactReader& r, SchemaColumn& col) {
  r.begin_struct();
  for (auto f = r.field(); f.type != kStop; f = r.field()) {
    if (f.id == 1 && f.type == kByte) {
      col.logical_bits = static_cast<std::int32_t>(*r.position());
      r.skip(f.type);
    } else {
      r.skip(f.type);
    }
  }
  r.end_struct();
}

SchemaColumn parse_schema_element(CompactReader& r) {
  SchemaColumn col;
  r.begin_struct();
  for (auto f = r.field(); f.type != kStop; f = r.field()) {
    switch (f.id) {
      case 1:
        col.type = r.i32();
        break;
      case 3:
        col.repetition = r.i32();
        break;
      case 4:
        col.name = r.binary();
        break;
      case 5:
        col.is_group = r.i32() > 0;
        break;
      case 6:
        col.converted = r.i32();
        break;
      case 10:
        if (f.type != kStruct) corrupt("logical type is not a struct");
        r.begin_struct();
        for (auto g = r.field(); g.type != kStop; g = r.field()) {
          if (g.id == 10 && g.type == kStruct) {
            parse_int_type(r, col);
          } else {
            r.skip(g.type);
          }
        }
        r.end_struct();
        break;
      default:
        r.skip(f.type);
    }
  }
  r.end_struct();
  return col;
}

ChunkMeta parse_column_meta(CompactReader& r) {
  ChunkMeta m;
  r.begin_struct();
  for (auto f = r.field(); f.type != kStop; f = r.field()) {
    switch (f.id) {
      case 1:
        m.type = r.i32();
        break;
      case 3: {
        const auto [elem, n] = r.list_header();
        if (elem != kBinary) corrupt("path_in_schema is not a string list");
        for (std::size_t i = 0; i < n; ++i) m.path.push_back(r.binary());
        break;
      }
      case 4:
        m.codec = r.i32();
        break;
      case 5:
        m.num_values = r.integer();
        break;
      case 9:
        m.data_page_offset = r.integer();
        break;
      case 11:
        m.dictionary_page_offset = r.integer();
        break;
      default:
        r.skip(f.type);
    }
  }
  r.end_struct();
  return m;
}

std::vector<ChunkMeta> parse_row_group(CompactReader& r, std::int64_t& rows) {
  std::vector<ChunkMeta> chunks;
  r.begin_struct();
  for (auto f = r.field(); f.type != kStop; f = r.field()) {
    if (f.id == 1 && f.type == kList) {
      const auto [elem, n] = r.list_header();
      if (elem != kStruct) corrupt("column chunk list");
      for (std::size_t i = 0; i < n; ++i) {
        ChunkMeta meta;
        bool has_meta = false;
        r.begin_struct();
        for (auto g = r.field(); g.type != kStop; g = r.field()) {
          if (g.id == 1) {
            r.binary();
            throw SchemaError("parquet column chunks in external files are not supported");
          } else if (g.id == 3 && g.type == kStruct) {
            meta = parse_column_meta(r);
            has_meta = true;
          } else {
            r.skip(g.type);
          }
        }
        r.end_struct();
        if (!has_meta) corrupt("column chunk without metadata");
        chunks.push_back(std::move(meta));
      }
    } else if (f.id == 3) {
      rows = r.integer();
    } else {
      r.skip(f.type);
    }
  }
  r.end_struct();
  return chunks;
}

struct PageHeader {
  std::int32_t type = -1;
  std::int32_t uncompressed = -1;
  std::int32_t compressed = -1;
  std::int32_t num_values = -1;
  std::int32_t encoding = -1;
};

PageHeader parse_page_header(CompactReader& r) {
  PageHeader h;
  r.begin_struct();
  for (auto f = r.field(); f.type != kStop; f = r.field()) {
    switch (f.id) {
      case 1:
        h.type = r.i32();
        break;
      case 2:
        h.uncompressed = r.i32();
        break;
      case 3:
        h.compressed = r.i32();
        break;
      case 5:
        r.begin_struct();
        for (auto g = r.field(); g.type != kStop; g = r.field()) {
          if (g.id == 1) {
            h.num_values = r.i32();
          } else if (g.id == 2) {
            h.encoding = r.i32();
          } else {
            r.skip(g.type);
          }
        }
        r.end_struct();
        break;
      default:
        r.skip(f.type);
    }
  }
  r.end_struct();
  return h;
}

void read_chunk(std::string_view bytes, const ChunkMeta& meta, Column& col) {
  const auto* base = reinterpret_cast<const std::uint8_t*>(bytes.data());
  if (meta.codec != kCodecUncompressed) {
    throw SchemaError("column '" + col.name + "' is compressed; only uncompressed files are supported");
  }
  if (meta.dictionary_page_offset >= 0) {
    throw SchemaError("column '" + col.name + "' uses dictionary encoding, which is not supported");
  }
  if (meta.data_page_offset < 0 || static_cast<std::size_t>(meta.data_page_offset) >= bytes.size()) {
    corrupt("data page offset out of range");
  }
  std::size_t pos = static_cast<std::size_t>(meta.data_page_offset);
  std::int64_t remaining = meta.num_values;
  while (remaining > 0) {
    CompactReader r(base + pos, base + bytes.size());
    const PageHeader h = parse_page_header(r);
    pos = static_cast<std::size_t>(r.position() - base);
    if (h.type != kPageData) throw SchemaError("unsupported parquet page type " + std::to_string(h.type));
    if (h.encoding != kEncodingPlain) {
      throw SchemaError("column '" + col.name + "' is not PLAIN encoded");
    }
    if (h.num_values < 0 || h.compressed != h.uncompressed ||
        static_cast<std::int64_t>(h.compressed) != 4 * static_cast<std::int64_t>(h.num_values) ||
        static_cast<std::size_t>(h.compressed) > bytes.size() - pos) {
      corrupt("page size mismatch in column '" + col.name + "'");
    }
    for (std::int32_t i = 0; i < h.num_values; ++i) {
      const std::uint32_t bits = read_le32(base + pos + 4 * static_cast<std::size_t>(i));
      if (col.type == ColumnType::kFloat) {
        float f;
        std::memcpy(&f, &bits, 4);
        col.floats.push_back(f);
      } else {
        col.ints.push_back(static_cast<std::int32_t>(bits));
      }
    }
    pos += static_cast<std::size_t>(h.compressed);
    remaining -= h.num_values;
  }
  if (remaining != 0) corrupt("column '" + col.name + "' has more values than declared");
}

}  // namespace

Table decode(std::string_view bytes) {
  if (bytes.size() < 12 || bytes.substr(0, 4) != kMagic || bytes.substr(bytes.size() - 4) != kMagic) {
    throw SchemaError("not a parquet file");
  }
  const auto* base = reinterpret_cast<const std::uint8_t*>(bytes.data());
  const std::uint32_t footer_len = read_le32(base + bytes.size() - 8);
  if (footer_len > bytes.size() - 12) corrupt("footer length out of range");
  const std::uint8_t* footer = base + bytes.size() - 8 - footer_len;

  std::vector<SchemaColumn> schema;
  std::vector<std::vector<ChunkMeta>> groups;
  std::vector<std::int64_t> group_rows;
  std::int64_t num_rows = 0;
  Table table;

  CompactReader r(footer, base + bytes.size() - 8);
  r.begin_struct();
  for (auto f = r.field(); f.type != kStop; f = r.field()) {
    switch (f.id) {
      case 2: {
        const auto [elem, n] = r.list_header();
        if (elem != kStruct) corrupt("schema list");
        for (std::size_t i = 0; i < n; ++i) schema.push_back(parse_schema_element(r));
        break;
      }
      case 3:
        num_rows = r.integer();
        break;
      case 4: {
        const auto [elem, n] = r.list_header();
        if (elem != kStruct) corrupt("row group list");
        for (std::size_t i = 0; i < n; ++i) {
          std::int64_t rows = 0;
          groups.push_back(parse_row_group(r, rows));
          group_rows.push_back(rows);
        }
        break;
      }
      case 5: {
        const auto [elem, n] = r.list_header();
        if (elem != kStruct) corrupt("key/value list");
        for (std::size_t i = 0; i < n; ++i) {
          std::string key, value;
          r.begin_struct();
          for (auto g = r.field(); g.type != kStop; g = r.field()) {
            if (g.id == 1) {
              key = r.binary();
            } else if (g.id == 2) {
              value = r.binary();
            } else {
              r.skip(g.type);
            }
          }
          r.end_struct();
          table.metadata.emplace_back(std::move(key), std::move(value));
        }
        break;
      }
      default:
        r.skip(f.type);
    }
  }
  r.end_struct();

  if (schema.empty()) corrupt("empty schema");
  for (std::size_t i = 1; i < schema.size(); ++i) {
    const SchemaColumn& s = schema[i];
    if (s.is_group) throw SchemaError("nested parquet schemas are not supported");
    if (s.repetition != kRequired) {
      throw SchemaError("column '" + s.name + "' is not a required column");
    }
    Column col;
    col.name = s.name;
    if (s.type == kTypeFloat) {
      col.type = ColumnType::kFloat;
    } else if (s.type == kTypeInt32) {
      const bool int8 = s.converted == kConvertedInt8 || s.logical_bits == 8;
      col.type = int8 ? ColumnType::kInt8 : ColumnType::kInt32;
    } else {
      throw SchemaError("column '" + s.name + "' has unsupported physical type " +
                        std::to_string(s.type));
    }
    table.columns.push_back(std::move(col));
  }

  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].size() != table.columns.size()) corrupt("row group column count");
    for (std::size_t c = 0; c < groups[g].size(); ++c) {
      const ChunkMeta& meta = groups[g][c];
      Column& col = table.columns[c];
      if (meta.path.size() != 1 || meta.path[0] != col.name) corrupt("column chunk order");
      if (meta.num_values != group_rows[g]) corrupt("column chunk value count");
      read_chunk(bytes, meta, col);
    }
  }
  for (const auto& col : table.columns) {
    if (static_cast<std::int64_t>(col.size()) != num_rows) corrupt("row count mismatch");
  }
  return table;
}

}  // namespace roomsir::parquet
