#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tickbench/analytics.hpp"
#include "tickbench/benchmarks.hpp"
#include "tickbench/model.hpp"
#include "tickbench/result_table.hpp"

// Embedded column store. Layout under the root directory:
//
//   manifest.json
//   trades/2022-06-01/timestamp.bin, exchange.bin, exchange.dict, ...
//   books/2022-06-01/...
//
// Partitions are one UTC day and immutable once published.
namespace tickbench {

/// Which columns get the delta/varint encoding. Empty means none.
struct CompressionPolicy {
  bool all = false;
  std::vector<std::string> columns;

  bool applies(std::string_view column) const;
  /// "none", "all" or a comma separated column list.
  static CompressionPolicy parse(std::string_view text);
};

struct EngineOptions {
  CompressionPolicy compression;
  /// fsync column files and directories before publishing.
  bool sync = true;
};

struct IngestReport {
  TableKind table = TableKind::Trades;
  std::uint64_t rows = 0;
  std::uint64_t rejected = 0;
  /// First few rejected rows as "line N: reason".
  std::vector<std::string> reject_samples;
  std::vector<Date> partitions;
  std::uint64_t source_file_bytes = 0;
  Duration elapsed{};
};

struct IngestTotals {
  std::size_t ingests = 0;
  std::uint64_t rows = 0;
  std::uint64_t source_file_bytes = 0;
  Duration elapsed{};
};

struct StorageReport {
  std::uint64_t data_bytes_on_disk = 0;
  std::uint64_t source_file_bytes = 0;
  double efficiency_percent = 0.0;

  friend bool operator==(const StorageReport&, const StorageReport&) = default;
};

/// 100 * data / source; invalid_argument when source is zero.
StorageReport make_storage_report(std::uint64_t data_bytes, std::uint64_t source_file_bytes);

struct ExecuteResult {
  ResultTable table;
  Duration server_elapsed{};
  std::uint64_t peak_query_bytes = 0;
};

struct PartitionInfo {
  Date date;
  std::uint64_t rows = 0;
};

class Engine {
 public:
  /// Opens or creates a store rooted at `root`.
  explicit Engine(const std::filesystem::path& root, EngineOptions options = {});
  ~Engine();
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  const std::filesystem::path& root() const;

  /// Parses, validates and persists one CSV file. A malformed line aborts
  /// the ingest (nothing is published); rows that parse but break a model
  /// invariant are skipped and counted. A day that is already stored is
  /// refused with already_exists.
  IngestReport ingest_csv(const std::filesystem::path& path, TableKind kind);
  /// Detects the table from the header line.
  IngestReport ingest_csv(const std::filesystem::path& path);

  /// Writes the rows of `range` in stored order; returns the row count.
  std::uint64_t export_csv(TableKind kind, const TimeRange& range, const std::filesystem::path& path) const;
  std::uint64_t export_csv(TableKind kind, const std::filesystem::path& path) const;

  /// Bytes of every file the table needs, manifest included.
  std::uint64_t data_bytes(TableKind kind) const;
  StorageReport storage_report(TableKind kind, std::uint64_t source_file_bytes) const;
  /// Totals over the ingests recorded in the manifest for this table.
  IngestTotals recorded_ingest(TableKind kind) const;

  std::vector<PartitionInfo> partitions(TableKind kind) const;
  std::uint64_t row_count(TableKind kind) const;
  bool empty(TableKind kind) const;

  /// Runs a read benchmark over the stored partitions. Throws not_found when
  /// none of the days in spec.range is stored in either table.
  ExecuteResult execute(const BenchmarkSpec& spec, const analytics::RunOptions& options = {}) const;

  std::vector<Trade> load_trades(const TimeRange& range) const;
  std::vector<BookSnapshot> load_books(const TimeRange& range) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tickbench
