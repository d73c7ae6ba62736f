#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tickbench/benchmarks.hpp"
#include "tickbench/model.hpp"
#include "tickbench/result_table.hpp"

// Reference implementations of the trade and order-book analytics. Every
// function is a pure batch computation over materialized rows; inputs need
// not be sorted. Where two rows share a timestamp, the later one in input
// order wins (input order is ingest order).
namespace tickbench::analytics {

enum class StddevKind { Sample, Population };

/// Counts rows an operation had to skip.
struct Diagnostics {
  std::size_t skipped_one_sided = 0;
};

/// Sum of amounts per (bucket, symbol, side); columns
/// bucket_start, symbol, side, volume.
ResultTable volume_by_bucket(std::span<const Trade> trades, const TimeRange& range, Duration width,
                             std::string_view symbol_filter, std::optional<Side> side_filter);

/// Volume-weighted average price per bucket; columns bucket_start, vwap.
ResultTable vwap_by_bucket(std::span<const Trade> trades, const TimeRange& range, Duration width,
                           std::string_view symbol);

struct TopOfBook {
  Timestamp timestamp{};
  Decimal best_bid;
  Decimal best_ask;
};

/// Level-1 prices of the latest snapshot at or before `at`; not_found when
/// there is none. Throws invalid_data if that snapshot is one-sided.
TopOfBook top_of_book(std::span<const BookSnapshot> books, std::string_view symbol, Timestamp at);

/// Maximum level-1 bid over the range; not_found when no snapshot has a bid.
Decimal highest_bid(std::span<const BookSnapshot> books, std::string_view symbol,
                    const TimeRange& range);

/// Per-snapshot ask1 - bid1 in timestamp order; columns timestamp, spread.
ResultTable spread_series(std::span<const BookSnapshot> books, std::string_view symbol,
                          const TimeRange& range, Diagnostics* diagnostics = nullptr);

struct DepthPoint {
  TimeBucket bucket;
  double avg_depth = 0.0;
};
using DepthSeries = std::vector<DepthPoint>;

/// Sum of sizes over levels 1..level_n on one side, averaged per bucket.
DepthSeries market_depth_series(std::span<const BookSnapshot> books, std::string_view symbol,
                                Side side, int level_n, const TimeRange& range, Duration width);

struct NbboQuote {
  TimeBucket bucket;
  std::string symbol;
  Decimal best_bid;
  Decimal best_ask;
  std::string bid_exchange;
  std::string ask_exchange;
};

/// Consolidates each exchange's last two-sided snapshot per bucket.
std::vector<NbboQuote> nbbo_series(std::span<const BookSnapshot> books, std::string_view symbol,
                                   const TimeRange& range, Duration width);

/// Last price per non-empty bucket.
ClosingPriceSeries closing_prices(std::span<const PricePoint> points, const TimeRange& range,
                                  Duration width);

/// ln(close_i) - ln(close_{i-1}) over consecutive non-empty buckets.
ReturnSeries log_returns(const ClosingPriceSeries& closes);

/// (ask1 + bid1) / 2 per two-sided snapshot, timestamp order.
std::vector<PricePoint> mid_quote_points(std::span<const BookSnapshot> books, std::string_view symbol,
                                         const TimeRange& range, Diagnostics* diagnostics = nullptr);

/// Execution prices of one symbol's trades in the range, timestamp order.
std::vector<PricePoint> trade_price_points(std::span<const Trade> trades, std::string_view symbol,
                                           const TimeRange& range);

/// Standard deviation of returns grouped by window; groups with a single
/// return report 0. Columns window_start, volatility.
ResultTable volatility(const ReturnSeries& returns, Duration window,
                       StddevKind kind = StddevKind::Sample);

ResultTable to_table(const TopOfBook& top);
ResultTable to_table(const DepthSeries& series);
ResultTable to_table(const std::vector<NbboQuote>& quotes);
ResultTable to_table(const ReturnSeries& returns);
ResultTable highest_bid_table(Decimal value);

/// Column set every backend must produce for a read benchmark.
const std::vector<ColumnSpec>& canonical_columns(BenchmarkId id);
/// Number of leading columns that form the row key.
std::size_t key_column_count(BenchmarkId id);

struct RunOptions {
  StddevKind stddev = StddevKind::Sample;
  /// O-T instant; drawn from the spec's seed when unset.
  std::optional<Timestamp> top_of_book_at;
};

/// Executes one read benchmark over the given rows.
ResultTable run_benchmark(const BenchmarkSpec& spec, std::span<const Trade> trades,
                          std::span<const BookSnapshot> books, const RunOptions& options = {});

}  // namespace tickbench::analytics
