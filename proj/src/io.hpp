#pragma once

// File helpers shared by the CSV and column-store code.

#include <cstdio>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace tickbench::io {

/// Reads a file line by line through a large buffer. Lines are returned
/// without the trailing `\n`; views stay valid until the next call.
class LineReader {
 public:
  explicit LineReader(const std::filesystem::path& path);
  ~LineReader();
  LineReader(const LineReader&) = delete;
  LineReader& operator=(const LineReader&) = delete;

  bool next(std::string_view& line);
  std::uint64_t line_number() const { return line_no_; }

 private:
  bool refill();

  std::filesystem::path path_;
  std::FILE* file_ = nullptr;
  std::vector<char> buf_;
  std::size_t begin_ = 0;
  std::size_t end_ = 0;
  bool eof_ = false;
  std::uint64_t line_no_ = 0;
};

/// Binary writer with optional fsync on close.
class FileWriter {
 public:
  FileWriter(const std::filesystem::path& path, bool sync_on_close);
  ~FileWriter();
  FileWriter(const FileWriter&) = delete;
  FileWriter& operator=(const FileWriter&) = delete;

  void write(const void* data, std::size_t size);
  void write(std::string_view bytes) { write(bytes.data(), bytes.size()); }
  std::uint64_t close();

 private:
  std::filesystem::path path_;
  std::FILE* file_ = nullptr;
  bool sync_;
  std::uint64_t bytes_ = 0;
};

/// fsync a directory so renames inside it are durable.
void sync_directory(const std::filesystem::path& dir);

/// Splits on commas into at most `max_fields` views; returns the count.
std::size_t split_fields(std::string_view line, std::string_view* fields, std::size_t max_fields);

}  // namespace tickbench::io
