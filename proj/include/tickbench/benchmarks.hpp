#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tickbench/model.hpp"

namespace tickbench {

enum class BenchmarkId : std::uint8_t {
  TV1,
  TV2,
  TVWAP,
  OT,
  OB1,
  OB2,
  OS,
  OV1,
  OV2,
  ONBBO,
  CR,
  CVT,
  CVO1,
  CVO2,
  W,
  SE,
};

enum class Category : std::uint8_t { Trades, OrderBook, ComplexQuery, Writing, StorageEfficiency };
enum class Intensity : std::uint8_t { None, Light, Heavy };
enum class TableKind : std::uint8_t { Trades, Books };

struct BenchmarkInfo {
  BenchmarkId id;
  std::string_view name;
  Category category;
  std::string_view description;
  Intensity io;
  Intensity compute;
};

/// All sixteen benchmarks in catalogue order.
std::span<const BenchmarkInfo> benchmark_table();
const BenchmarkInfo& info(BenchmarkId id);
/// The fourteen query benchmarks (everything but W and SE), catalogue order.
std::span<const BenchmarkId> read_benchmarks();
bool is_read_benchmark(BenchmarkId id);

std::string_view to_string(BenchmarkId id);
std::string_view to_string(Category category);
std::string_view to_string(Intensity intensity);
std::string_view to_string(TableKind kind);
/// Throws invalid_argument listing the valid ids.
BenchmarkId parse_benchmark_id(std::string_view text);
std::optional<BenchmarkId> try_parse_benchmark_id(std::string_view text) noexcept;
TableKind parse_table_kind(std::string_view text);

/// Which stored table a read benchmark scans.
TableKind source_table(BenchmarkId id);

inline constexpr std::string_view kAllSymbols = "*";

/// Fully parameterized instance of one benchmark.
struct BenchmarkSpec {
  BenchmarkId id = BenchmarkId::TV1;
  Category category = Category::Trades;
  TimeRange range;
  /// Base aggregation bucket; zero when the benchmark has none.
  Duration inner_width{};
  /// Volatility window; zero unless C-VT / C-VO1 / C-VO2.
  Duration outer_width{};
  std::string symbol = std::string(kAllSymbols);
  std::optional<Side> side;
  /// 1..20 for O-V1 / O-V2, zero otherwise.
  int depth_level = 0;
  Intensity io = Intensity::Light;
  Intensity compute = Intensity::Light;
  /// O-T only.
  std::optional<std::uint64_t> rng_seed;
};

/// Throws invalid_argument when a field does not apply to the id or its
/// value is out of range.
void validate(const BenchmarkSpec& spec);

struct CatalogOptions {
  /// First day of the day/week/month ranges.
  Date anchor_day = Date{std::chrono::year{2022} / 6 / 18};
  /// Day used by O-NBBO; defaults to anchor_day.
  std::optional<Date> nbbo_day;
  std::string symbol = "BTC-USD";
  std::uint64_t top_of_book_seed = 42;
  /// T-V2 with 1-hour buckets instead of daily ones.
  bool hourly_tv2 = false;
};

/// Binds a benchmark id to its range, widths and filters.
BenchmarkSpec make_spec(BenchmarkId id, const CatalogOptions& options = {});

/// The random timestamp O-T queries, drawn uniformly from spec.range.
Timestamp draw_random_at(const BenchmarkSpec& spec);

}  // namespace tickbench
