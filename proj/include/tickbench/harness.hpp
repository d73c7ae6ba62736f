#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tickbench/backends.hpp"
#include "tickbench/benchmarks.hpp"
#include "tickbench/engine.hpp"

// Measurement protocol: cache clearing, repeated executions, consistency
// against the reference backend, and report files.
namespace tickbench::harness {

enum class LatencySource { ServerReported, HarnessWallClock };
std::string_view to_string(LatencySource source);
LatencySource parse_latency_source(std::string_view text);

enum class Consistency { Equal, Mismatch, Unstable, NotChecked };
std::string_view to_string(Consistency c);
Consistency parse_consistency(std::string_view text);

struct RunPlan {
  std::string backend_id = "embedded";
  std::string reference_id = "embedded";
  std::vector<BenchmarkSpec> specs;
  int repetitions = 10;
  /// Shell command run before every execution, or "none".
  std::string cache_clear_command = "none";
  /// One uncounted execution before the measured ones.
  bool warm_up = false;
};

/// Throws invalid_argument for repetitions < 1 or an empty plan.
void validate(const RunPlan& plan);

struct PlanSelection {
  /// "all" or a comma separated id list.
  std::string benchmarks = "all";
  CatalogOptions catalog;
};

/// Read benchmark specs in catalogue order; unknown ids or W/SE give
/// invalid_argument listing the valid ones.
std::vector<BenchmarkSpec> select_specs(const PlanSelection& selection);

/// INI plan file:
///
///   [plan]
///   backend = embedded
///   benchmarks = T-V1, O-S
///   repetitions = 10
///   cache_clear_command = none
///   warm_up = false
///   day = 2022-06-18
///   symbol = BTC-USD
RunPlan load_plan(const std::filesystem::path& path);

/// The plan with the selection it was built from, so callers can override
/// the day or symbol and rebuild the specs.
struct PlanFile {
  RunPlan plan;
  PlanSelection selection;
};
PlanFile read_plan_file(const std::filesystem::path& path);

struct BenchmarkResult {
  BenchmarkId id = BenchmarkId::TV1;
  std::string backend;
  std::vector<double> latencies_ms;
  double mean_latency_ms = 0.0;
  LatencySource latency_source = LatencySource::HarnessWallClock;
  /// Largest value any repetition reported; unset when the backend cannot
  /// report it (see query_storage_supported).
  std::optional<std::uint64_t> query_storage_bytes;
  bool query_storage_supported = false;
  std::string result_digest;
  bool digests_stable = true;
  std::uint64_t rows = 0;
  Consistency consistency = Consistency::NotChecked;
  std::string detail;
  /// Operational failure (cache clear, query, connection); no latency is
  /// reported when set.
  std::optional<std::string> error;

  friend bool operator==(const BenchmarkResult&, const BenchmarkResult&) = default;
};

/// Plain left-to-right sum divided by the count.
double arithmetic_mean(const std::vector<double>& values);

/// Runs every spec `repetitions` times on `target` and compares the final
/// normalized result with `reference`. Target and reference may be the same
/// object. Backends are used strictly one at a time.
std::vector<BenchmarkResult> run(const RunPlan& plan, backends::Backend& target, backends::Backend& reference);

/// 0 when every result is consistent, 1 on any operational error, otherwise
/// 2 when some result is inconsistent.
int exit_code(const std::vector<BenchmarkResult>& results);

struct IngestResult {
  std::string backend;
  double elapsed_ms = 0.0;
  std::uint64_t rows = 0;
  std::uint64_t source_file_bytes = 0;
  /// Source megabytes (1e6 bytes) per second.
  double throughput_mb_s = 0.0;

  friend bool operator==(const IngestResult&, const IngestResult&) = default;
};

double throughput_mb_s(std::uint64_t bytes, double elapsed_ms);

/// Requires empty target tables (already_exists otherwise) and existing
/// files (not_found naming the file). Elapsed is wall clock around the
/// backend's ingest, which returns once the rows are queryable.
IngestResult run_ingest_benchmark(backends::Backend& backend, const std::vector<std::filesystem::path>& csv_paths);

struct StorageOutcome {
  std::string backend;
  bool supported = false;
  StorageReport report;

  friend bool operator==(const StorageOutcome&, const StorageOutcome&) = default;
};

/// Unsupported capability is reported, not thrown.
StorageOutcome run_storage_benchmark(backends::Backend& backend, std::uint64_t source_file_bytes);

struct Report {
  std::vector<BenchmarkResult> results;
  std::optional<IngestResult> ingest;
  std::optional<StorageOutcome> storage;

  friend bool operator==(const Report&, const Report&) = default;
};

enum class ReportFormat { Json, Csv, Plotdata };
ReportFormat parse_report_format(std::string_view text);

std::string to_json(const Report& report);
/// One compact object per line: the results, then W and SE when present.
std::string to_json_lines(const Report& report);
/// Throws invalid_data with the parse location for malformed input.
Report report_from_json(std::string_view text);
Report read_report(const std::filesystem::path& path);

/// One row per result, grouped by benchmark category.
std::string to_csv(const Report& report);

/// JSON and CSV write `path`; plotdata treats `path` as a directory and
/// writes one `<category>.dat` per category present. Returns the files
/// written.
std::vector<std::filesystem::path> emit_report(const Report& report, ReportFormat format,
                                               const std::filesystem::path& path);

}  // namespace tickbench::harness
