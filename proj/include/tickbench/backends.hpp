#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tickbench/benchmarks.hpp"
#include "tickbench/engine.hpp"
#include "tickbench/result_table.hpp"

// Adapters for the databases under test, query asset rendering, and the
// normalization that makes results from different systems comparable.
namespace tickbench::backends {

struct Capabilities {
  bool reports_server_latency = false;
  bool reports_query_storage = false;
  bool reports_data_bytes = false;
};

struct BackendDescriptor {
  std::string id;
  /// embedded, clickhouse, influxdb, timescaledb or kdb.
  std::string type;
  /// host, port, user, password, database, root, ... as configured.
  std::map<std::string, std::string> connection;
  std::filesystem::path asset_dir;
  Capabilities capabilities;

  std::string get(const std::string& key, const std::string& fallback = "") const;
};

// ---------------------------------------------------------------------------
// Configuration

/// Directory holding one asset set per backend type.
std::filesystem::path default_asset_root();

struct Config {
  std::map<std::string, BackendDescriptor> backends;

  /// Throws config error naming the id and the configured ones.
  const BackendDescriptor& backend(const std::string& id) const;
};

/// INI file, one section per backend id:
///
///   [ch]
///   type = clickhouse
///   host = localhost
///   port = 8123
///   assets = /path/to/assets/clickhouse
///
/// An "embedded" backend over `store_dir` is always defined unless the file
/// overrides it.
Config load_config(const std::optional<std::filesystem::path>& path, const std::filesystem::path& store_dir);
/// --config value if set, else $TICKBENCH_CONFIG, else none.
std::optional<std::filesystem::path> resolve_config_path(const std::optional<std::string>& flag);

// ---------------------------------------------------------------------------
// Query assets

struct QueryAsset {
  BenchmarkId id = BenchmarkId::TV1;
  std::string text;
  /// Literal syntax used by render(): embedded, timescaledb, clickhouse,
  /// influxdb or kdb.
  std::string dialect;
};

/// Reads `<dir>/<id>.tpl`.
QueryAsset load_asset(const std::filesystem::path& dir, BenchmarkId id, const std::string& dialect);

/// Substitutes {{range_begin}}, {{range_end}}, {{symbol}}, {{side}},
/// {{inner_width}}, {{outer_width}}, {{depth_level}} and {{random_at}}.
/// Throws config error for an unknown placeholder or one the spec leaves
/// unset.
std::string render(const QueryAsset& asset, const BenchmarkSpec& spec);

// ---------------------------------------------------------------------------
// Results

struct RawResult {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::optional<Duration> server_elapsed;
  std::optional<std::uint64_t> query_bytes;
};

RawResult to_raw(const ResultTable& table);

/// Maps raw columns onto the canonical set (exact names first, then the
/// aliases _time/time/bucket/window for the leading timestamp column and
/// _value for the last one), parses cells per column class and sorts rows.
/// Throws schema_mismatch when a canonical column is missing.
ResultTable normalize(const RawResult& raw, BenchmarkId id);
/// Sorts rows by the key columns, then by the remaining ones.
void canonical_sort(ResultTable& table, BenchmarkId id);

struct Verdict {
  bool equal = true;
  std::string detail;
  std::optional<std::size_t> row;
  std::optional<std::size_t> column;
};

inline constexpr double kRelativeTolerance = 1e-9;
inline constexpr double kAbsoluteTolerance = 1e-12;

/// Exact on timestamps, strings and decimals; floats within
/// max(1e-12, 1e-9 * max(|a|, |b|)).
Verdict compare(const ResultTable& a, const ResultTable& b);

// ---------------------------------------------------------------------------
// Adapters

struct IngestOutcome {
  Duration elapsed{};
  std::uint64_t rows = 0;
  std::uint64_t source_file_bytes = 0;
};

class Backend {
 public:
  explicit Backend(BackendDescriptor descriptor) : descriptor_(std::move(descriptor)) {}
  virtual ~Backend() = default;
  Backend(const Backend&) = delete;
  Backend& operator=(const Backend&) = delete;

  const BackendDescriptor& descriptor() const { return descriptor_; }
  const Capabilities& capabilities() const { return descriptor_.capabilities; }

  /// Throws connection error when the server is unreachable.
  virtual void connect() = 0;
  /// True when the trades and books tables hold no rows.
  virtual bool is_fresh() = 0;
  virtual IngestOutcome ingest(const std::vector<std::filesystem::path>& csv_paths) = 0;
  /// Executes a rendered query; throws query error with the backend's message.
  virtual RawResult execute(const std::string& query) = 0;
  /// On-disk size of the stored tables; throws unsupported without the
  /// reports_data_bytes capability.
  virtual std::uint64_t data_bytes();
  virtual void close() {}

  /// Last ingest recorded by the backend itself, when it keeps one.
  virtual std::optional<IngestOutcome> recorded_ingest() { return std::nullopt; }

  QueryAsset asset(BenchmarkId id) const;
  /// Renders this backend's asset for the spec and executes it.
  RawResult run(const BenchmarkSpec& spec);

 private:
  BackendDescriptor descriptor_;
};

/// Executes the key=value query language of the embedded asset set on an
/// Engine.
class EmbeddedBackend : public Backend {
 public:
  explicit EmbeddedBackend(BackendDescriptor descriptor);
  ~EmbeddedBackend() override;

  void connect() override;
  bool is_fresh() override;
  IngestOutcome ingest(const std::vector<std::filesystem::path>& csv_paths) override;
  RawResult execute(const std::string& query) override;
  std::uint64_t data_bytes() override;
  std::optional<IngestOutcome> recorded_ingest() override;

  Engine& engine();

 private:
  std::unique_ptr<Engine> engine_;
};

/// One parsed embedded query.
struct EmbeddedQuery {
  BenchmarkSpec spec;
  analytics::RunOptions options;
};
/// Parses the embedded asset language; throws query error with a line number.
EmbeddedQuery parse_embedded_query(const std::string& text);

/// Builds the adapter for a descriptor's type; unsupported for types that
/// ship assets but no client.
std::unique_ptr<Backend> make_backend(const BackendDescriptor& descriptor);

}  // namespace tickbench::backends
