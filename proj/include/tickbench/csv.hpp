#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "tickbench/benchmarks.hpp"
#include "tickbench/model.hpp"

// Bit-exact CSV interchange formats for the trades and books tables:
// comma separated, `\n` line endings, no quoting, timestamps as
// YYYY-MM-DDTHH:MM:SS.fffffffffZ and decimals in their shortest exact form.
// Absent book levels are empty price and size fields.
namespace tickbench::csv {

const std::string& header(TableKind kind);
/// Reads the first line of a file and matches it against both headers.
TableKind detect_table(const std::filesystem::path& path);

void append_trade_row(std::string& out, const Trade& trade);
void append_book_row(std::string& out, const BookSnapshot& book);

/// Throws invalid_data for a malformed line.
Trade parse_trade_row(std::string_view line);

struct ParsedBook {
  BookSnapshot book;
  /// Set when the fields parse but describe an invalid ladder (for example a
  /// gap between present levels).
  std::optional<std::string> violation;
};
ParsedBook parse_book_row(std::string_view line);

/// Buffered writer for one CSV file; the header is written on open.
class Writer {
 public:
  Writer(const std::filesystem::path& path, TableKind kind);
  ~Writer();
  Writer(const Writer&) = delete;
  Writer& operator=(const Writer&) = delete;

  void write(const Trade& trade);
  void write(const BookSnapshot& book);
  /// Flushes and closes; returns the file size in bytes.
  std::uint64_t close();
  std::uint64_t rows() const { return rows_; }

 private:
  void flush_if_full();

  std::filesystem::path path_;
  std::FILE* file_ = nullptr;
  std::string buffer_;
  std::uint64_t rows_ = 0;
  std::uint64_t bytes_ = 0;
};

}  // namespace tickbench::csv
