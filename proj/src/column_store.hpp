#pragma once

// Splayed column files: one file per (partition, column). Numeric and
// timestamp columns hold fixed-width little-endian integers; string columns
// hold u32 codes into a `<column>.dict` file (one entry per line). The
// optional `delta` encoding stores zigzag deltas as LEB128 varints.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tickbench/benchmarks.hpp"

namespace tickbench::store {

enum class ValueType : std::uint8_t { I64, U32, U8 };
enum class Encoding : std::uint8_t { Plain, Delta };

std::string_view to_string(Encoding encoding);
Encoding parse_encoding(std::string_view text);

struct ColumnDef {
  std::string name;
  ValueType type;
  bool dictionary = false;
};

/// Physical layout of the trades or books table, in CSV field order.
const std::vector<ColumnDef>& table_columns(TableKind kind);
/// Index of `name` in table_columns(kind).
std::size_t column_index(TableKind kind, std::string_view name);
/// Book level columns: side 0 = bids, 1 = asks; level is 1-based.
std::size_t book_price_column(int side, int level);
std::size_t book_size_column(int side, int level);

class ColumnWriter {
 public:
  ColumnWriter(const std::filesystem::path& path, ValueType type, Encoding encoding, bool sync);
  ~ColumnWriter();
  ColumnWriter(const ColumnWriter&) = delete;
  ColumnWriter& operator=(const ColumnWriter&) = delete;

  void append(std::int64_t value);
  std::uint64_t close();

 private:
  void flush(bool final_sync);

  std::filesystem::path path_;
  bool closed_ = false;
  ValueType type_;
  Encoding encoding_;
  bool sync_;
  std::int64_t previous_ = 0;
  std::vector<unsigned char> buf_;
  std::uint64_t bytes_ = 0;
};

/// Sequential decoder over one column file.
class ColumnReader {
 public:
  ColumnReader(const std::filesystem::path& path, ValueType type, Encoding encoding, std::uint64_t rows);
  ~ColumnReader();
  ColumnReader(const ColumnReader&) = delete;
  ColumnReader& operator=(const ColumnReader&) = delete;
  ColumnReader(ColumnReader&& other) noexcept;

  /// Decodes up to `max` values; returns how many were written.
  std::size_t read(std::int64_t* out, std::size_t max);
  std::uint64_t remaining() const { return remaining_; }

 private:
  bool refill();

  std::filesystem::path path_;
  std::FILE* file_ = nullptr;
  ValueType type_;
  Encoding encoding_;
  std::uint64_t remaining_;
  std::int64_t previous_ = 0;
  std::vector<unsigned char> buf_;
  std::size_t pos_ = 0;
  std::size_t len_ = 0;
};

void write_dictionary(const std::filesystem::path& path, const std::vector<std::string>& entries, bool sync);
std::vector<std::string> read_dictionary(const std::filesystem::path& path);

}  // namespace tickbench::store
