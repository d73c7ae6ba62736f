#include "tickbench/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>

#include "tickbench/error.hpp"

namespace tickbench::analytics {

namespace {

using Int128 = __int128;

/// Neumaier's compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

bool symbol_matches(std::string_view filter, const std::string& symbol) {
  return filter == kAllSymbols || filter == symbol;
}

std::int64_t bucket_key(Timestamp ts, Duration width) {
  return bucket_of(ts, width).start.time_since_epoch().count();
}

Timestamp from_key(std::int64_t key) { return Timestamp{Duration{key}}; }

double raw_ratio(Int128 numerator, Int128 denominator, long double scale) {
  return static_cast<double>(static_cast<long double>(numerator) / static_cast<long double>(denominator) /
                             scale);
}

void check_width(Duration width) {
  if (width.count() <= 0) fail(Errc::invalid_argument, "bucket width must be positive");
}

/// Indices of the rows selected by `keep`, stably ordered by timestamp.
template <typename Rows, typename Pred>
std::vector<std::size_t> select_in_time_order(const Rows& rows, Pred keep) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (keep(rows[i])) idx.push_back(i);
  }
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return rows[a].timestamp < rows[b].timestamp; });
  return idx;
}

}  // namespace

// ---------------------------------------------------------------------------
// Schemas

const std::vector<ColumnSpec>& canonical_columns(BenchmarkId id) {
  using C = ColumnClass;
  static const std::vector<ColumnSpec> volume{
      {"bucket_start", C::Timestamp}, {"symbol", C::String}, {"side", C::String}, {"volume", C::Decimal}};
  static const std::vector<ColumnSpec> vwap{{"bucket_start", C::Timestamp}, {"vwap", C::Float}};
  static const std::vector<ColumnSpec> top{
      {"timestamp", C::Timestamp}, {"best_bid", C::Decimal}, {"best_ask", C::Decimal}};
  static const std::vector<ColumnSpec> high{{"highest_bid", C::Decimal}};
  static const std::vector<ColumnSpec> spread{{"timestamp", C::Timestamp}, {"spread", C::Decimal}};
  static const std::vector<ColumnSpec> depth{{"bucket_start", C::Timestamp}, {"avg_depth", C::Float}};
  static const std::vector<ColumnSpec> nbbo{{"bucket_start", C::Timestamp}, {"symbol", C::String},
                                            {"best_bid", C::Decimal},       {"best_ask", C::Decimal},
                                            {"bid_exchange", C::String},    {"ask_exchange", C::String}};
  static const std::vector<ColumnSpec> returns{{"bucket_start", C::Timestamp}, {"return", C::Float}};
  static const std::vector<ColumnSpec> vol{{"window_start", C::Timestamp}, {"volatility", C::Float}};

  switch (id) {
    case BenchmarkId::TV1:
    case BenchmarkId::TV2: return volume;
    case BenchmarkId::TVWAP: return vwap;
    case BenchmarkId::OT: return top;
    case BenchmarkId::OB1:
    case BenchmarkId::OB2: return high;
    case BenchmarkId::OS: return spread;
    case BenchmarkId::OV1:
    case BenchmarkId::OV2: return depth;
    case BenchmarkId::ONBBO: return nbbo;
    case BenchmarkId::CR: return returns;
    case BenchmarkId::CVT:
    case BenchmarkId::CVO1:
    case BenchmarkId::CVO2: return vol;
    case BenchmarkId::W:
    case BenchmarkId::SE: break;
  }
  fail(Errc::invalid_argument, std::string(to_string(id)) + " has no result table");
}

std::size_t key_column_count(BenchmarkId id) {
  switch (id) {
    case BenchmarkId::TV1:
    case BenchmarkId::TV2: return 3;
    case BenchmarkId::ONBBO: return 2;
    case BenchmarkId::OB1:
    case BenchmarkId::OB2: return 0;
    default: return 1;
  }
}

// ---------------------------------------------------------------------------
// Trades

ResultTable volume_by_bucket(std::span<const Trade> trades, const TimeRange& range, Duration width,
                             std::string_view symbol_filter, std::optional<Side> side_filter) {
  check_width(width);
  std::map<std::tuple<std::int64_t, std::string, Side>, std::int64_t> groups;
  for (const Trade& t : trades) {
    if (!range.contains(t.timestamp) || !symbol_matches(symbol_filter, t.symbol)) continue;
    if (side_filter && t.side != *side_filter) continue;
    groups[{bucket_key(t.timestamp, width), t.symbol, t.side}] += t.amount.raw();
  }
  ResultTable out(canonical_columns(BenchmarkId::TV1));
  out.rows.reserve(groups.size());
  for (const auto& [key, raw] : groups) {
    const auto& [bucket, symbol, side] = key;
    out.rows.push_back(
        Row{from_key(bucket), symbol, std::string(to_string(side)), Decimal::from_raw(raw)});
  }
  return out;
}

ResultTable vwap_by_bucket(std::span<const Trade> trades, const TimeRange& range, Duration width,
                           std::string_view symbol) {
  check_width(width);
  if (symbol == kAllSymbols) fail(Errc::invalid_argument, "VWAP needs a concrete symbol");
  struct Acc {
    Int128 notional = 0;
    Int128 volume = 0;
  };
  std::map<std::int64_t, Acc> groups;
  for (const Trade& t : trades) {
    if (!range.contains(t.timestamp) || t.symbol != symbol) continue;
    Acc& acc = groups[bucket_key(t.timestamp, width)];
    acc.notional += static_cast<Int128>(t.price.raw()) * t.amount.raw();
    acc.volume += t.amount.raw();
  }
  ResultTable out(canonical_columns(BenchmarkId::TVWAP));
  out.rows.reserve(groups.size());
  for (const auto& [bucket, acc] : groups) {
    out.rows.push_back(
        Row{from_key(bucket), raw_ratio(acc.notional, acc.volume, static_cast<long double>(Decimal::kScale))});
  }
  return out;
}

std::vector<PricePoint> trade_price_points(std::span<const Trade> trades, std::string_view symbol,
                                           const TimeRange& range) {
  const auto idx = select_in_time_order(
      trades, [&](const Trade& t) { return t.symbol == symbol && range.contains(t.timestamp); });
  std::vector<PricePoint> points;
  points.reserve(idx.size());
  for (std::size_t i : idx) points.push_back({trades[i].timestamp, trades[i].price.to_double()});
  return points;
}

// ---------------------------------------------------------------------------
// Order book

TopOfBook top_of_book(std::span<const BookSnapshot> books, std::string_view symbol, Timestamp at) {
  const BookSnapshot* best = nullptr;
  for (const BookSnapshot& b : books) {
    if (b.symbol != symbol || b.timestamp > at) continue;
    if (best == nullptr || b.timestamp >= best->timestamp) best = &b;
  }
  if (best == nullptr) {
    fail(Errc::not_found,
         "no " + std::string(symbol) + " snapshot at or before " + format_timestamp(at));
  }
  if (!best->two_sided()) {
    fail(Errc::invalid_data, "snapshot at " + format_timestamp(best->timestamp) + " is one-sided");
  }
  return TopOfBook{best->timestamp, best->bids.front().price, best->asks.front().price};
}

Decimal highest_bid(std::span<const BookSnapshot> books, std::string_view symbol,
                    const TimeRange& range) {
  std::optional<Decimal> best;
  for (const BookSnapshot& b : books) {
    if (b.symbol != symbol || !range.contains(b.timestamp) || b.bids.empty()) continue;
    if (!best || b.bids.front().price > *best) best = b.bids.front().price;
  }
  if (!best) fail(Errc::not_found, "no " + std::string(symbol) + " bids in range");
  return *best;
}

ResultTable spread_series(std::span<const BookSnapshot> books, std::string_view symbol,
                          const TimeRange& range, Diagnostics* diagnostics) {
  std::size_t skipped = 0;
  const auto idx = select_in_time_order(books, [&](const BookSnapshot& b) {
    if (b.symbol != symbol || !range.contains(b.timestamp)) return false;
    if (!b.two_sided()) {
      ++skipped;
      return false;
    }
    return true;
  });
  if (diagnostics) diagnostics->skipped_one_sided += skipped;
  ResultTable out(canonical_columns(BenchmarkId::OS));
  out.rows.reserve(idx.size());
  for (std::size_t i : idx) {
    const BookSnapshot& b = books[i];
    out.rows.push_back(Row{b.timestamp, b.asks.front().price - b.bids.front().price});
  }
  return out;
}

DepthSeries market_depth_series(std::span<const BookSnapshot> books, std::string_view symbol,
                                Side side, int level_n, const TimeRange& range, Duration width) {
  check_width(width);
  if (level_n < 1 || level_n > kBookDepth) {
    fail(Errc::invalid_argument, "depth level must be in 1..20, got " + std::to_string(level_n));
  }
  struct Acc {
    Int128 total = 0;
    std::int64_t snapshots = 0;
  };
  std::map<std::int64_t, Acc> groups;
  for (const BookSnapshot& b : books) {
    if (b.symbol != symbol || !range.contains(b.timestamp)) continue;
    const auto& levels = side == Side::Buy ? b.bids : b.asks;
    const std::size_t n = std::min(levels.size(), static_cast<std::size_t>(level_n));
    std::int64_t depth = 0;
    for (std::size_t k = 0; k < n; ++k) depth += levels[k].size.raw();
    Acc& acc = groups[bucket_key(b.timestamp, width)];
    acc.total += depth;
    ++acc.snapshots;
  }
  DepthSeries out;
  out.reserve(groups.size());
  for (const auto& [bucket, acc] : groups) {
    out.push_back({TimeBucket{from_key(bucket), width},
                   raw_ratio(acc.total, acc.snapshots, static_cast<long double>(Decimal::kScale))});
  }
  return out;
}

std::vector<NbboQuote> nbbo_series(std::span<const BookSnapshot> books, std::string_view symbol,
                                   const TimeRange& range, Duration width) {
  check_width(width);
  // bucket -> exchange -> latest two-sided snapshot in that bucket
  std::map<std::int64_t, std::map<std::string_view, const BookSnapshot*>> latest;
  for (const BookSnapshot& b : books) {
    if (b.symbol != symbol || !range.contains(b.timestamp) || !b.two_sided()) continue;
    const BookSnapshot*& slot = latest[bucket_key(b.timestamp, width)][b.exchange];
    if (slot == nullptr || b.timestamp >= slot->timestamp) slot = &b;
  }
  std::vector<NbboQuote> out;
  out.reserve(latest.size());
  for (const auto& [bucket, per_exchange] : latest) {
    NbboQuote q;
    q.bucket = TimeBucket{from_key(bucket), width};
    q.symbol = std::string(symbol);
    bool first = true;
    // Exchanges iterate in lexicographic order; strict comparisons keep the
    // smallest id on price ties.
    for (const auto& [exchange, snap] : per_exchange) {
      const Decimal bid = snap->bids.front().price;
      const Decimal ask = snap->asks.front().price;
      if (first || bid > q.best_bid) {
        q.best_bid = bid;
        q.bid_exchange = std::string(exchange);
      }
      if (first || ask < q.best_ask) {
        q.best_ask = ask;
        q.ask_exchange = std::string(exchange);
      }
      first = false;
    }
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<PricePoint> mid_quote_points(std::span<const BookSnapshot> books, std::string_view symbol,
                                         const TimeRange& range, Diagnostics* diagnostics) {
  std::size_t skipped = 0;
  const auto idx = select_in_time_order(books, [&](const BookSnapshot& b) {
    if (b.symbol != symbol || !range.contains(b.timestamp)) return false;
    if (!b.two_sided()) {
      ++skipped;
      return false;
    }
    return true;
  });
  if (diagnostics) diagnostics->skipped_one_sided += skipped;
  std::vector<PricePoint> points;
  points.reserve(idx.size());
  for (std::size_t i : idx) {
    const BookSnapshot& b = books[i];
    const std::int64_t twice_mid = b.asks.front().price.raw() + b.bids.front().price.raw();
    points.push_back({b.timestamp, static_cast<double>(twice_mid) / (2.0 * Decimal::kScale)});
  }
  return points;
}

// ---------------------------------------------------------------------------
// Returns and volatility

ClosingPriceSeries closing_prices(std::span<const PricePoint> points, const TimeRange& range,
                                  Duration width) {
  check_width(width);
  std::map<std::int64_t, const PricePoint*> last;
  for (const PricePoint& p : points) {
    if (!range.contains(p.timestamp)) continue;
    const PricePoint*& slot = last[bucket_key(p.timestamp, width)];
    if (slot == nullptr || p.timestamp >= slot->timestamp) slot = &p;
  }
  ClosingPriceSeries out;
  out.reserve(last.size());
  for (const auto& [bucket, p] : last) out.push_back({TimeBucket{from_key(bucket), width}, p->price});
  return out;
}

ReturnSeries log_returns(const ClosingPriceSeries& closes) {
  for (const ClosingPrice& c : closes) {
    if (!(c.close > 0.0) || !std::isfinite(c.close)) {
      fail(Errc::invalid_data, "non-positive close price at " + format_timestamp(c.bucket.start));
    }
  }
  ReturnSeries out;
  if (closes.size() < 2) return out;
  out.reserve(closes.size() - 1);
  for (std::size_t i = 1; i < closes.size(); ++i) {
    out.push_back({closes[i].bucket, std::log(closes[i].close) - std::log(closes[i - 1].close)});
  }
  return out;
}

ResultTable volatility(const ReturnSeries& returns, Duration window, StddevKind kind) {
  check_width(window);
  std::map<std::int64_t, std::vector<double>> groups;
  for (const ReturnPoint& r : returns) groups[bucket_key(r.bucket.start, window)].push_back(r.value);

  ResultTable out(canonical_columns(BenchmarkId::CVT));
  out.rows.reserve(groups.size());
  for (const auto& [start, values] : groups) {
    double sd = 0.0;
    if (values.size() >= 2) {
      CompensatedSum sum;
      for (double v : values) sum.add(v);
      const double n = static_cast<double>(values.size());
      const double mean = sum.value() / n;
      CompensatedSum squares;
      for (double v : values) squares.add((v - mean) * (v - mean));
      const double denom = kind == StddevKind::Sample ? n - 1.0 : n;
      sd = std::sqrt(squares.value() / denom);
    }
    out.rows.push_back(Row{from_key(start), sd});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Table adapters

ResultTable to_table(const TopOfBook& top) {
  ResultTable out(canonical_columns(BenchmarkId::OT));
  out.rows.push_back(Row{top.timestamp, top.best_bid, top.best_ask});
  return out;
}

ResultTable to_table(const DepthSeries& series) {
  ResultTable out(canonical_columns(BenchmarkId::OV1));
  out.rows.reserve(series.size());
  for (const DepthPoint& p : series) out.rows.push_back(Row{p.bucket.start, p.avg_depth});
  return out;
}

ResultTable to_table(const std::vector<NbboQuote>& quotes) {
  ResultTable out(canonical_columns(BenchmarkId::ONBBO));
  out.rows.reserve(quotes.size());
  for (const NbboQuote& q : quotes) {
    out.rows.push_back(Row{q.bucket.start, q.symbol, q.best_bid, q.best_ask, q.bid_exchange, q.ask_exchange});
  }
  return out;
}

ResultTable to_table(const ReturnSeries& returns) {
  ResultTable out(canonical_columns(BenchmarkId::CR));
  out.rows.reserve(returns.size());
  for (const ReturnPoint& r : returns) out.rows.push_back(Row{r.bucket.start, r.value});
  return out;
}

ResultTable highest_bid_table(Decimal value) {
  ResultTable out(canonical_columns(BenchmarkId::OB1));
  out.rows.push_back(Row{value});
  return out;
}

// ---------------------------------------------------------------------------

ResultTable run_benchmark(const BenchmarkSpec& spec, std::span<const Trade> trades,
                          std::span<const BookSnapshot> books, const RunOptions& options) {
  validate(spec);
  const TimeRange& range = spec.range;
  switch (spec.id) {
    case BenchmarkId::TV1:
    case BenchmarkId::TV2:
      return volume_by_bucket(trades, range, spec.inner_width, spec.symbol, spec.side);
    case BenchmarkId::TVWAP:
      return vwap_by_bucket(trades, range, spec.inner_width, spec.symbol);
    case BenchmarkId::OT:
      return to_table(top_of_book(books, spec.symbol, options.top_of_book_at.value_or(draw_random_at(spec))));
    case BenchmarkId::OB1:
    case BenchmarkId::OB2:
      return highest_bid_table(highest_bid(books, spec.symbol, range));
    case BenchmarkId::OS:
      return spread_series(books, spec.symbol, range);
    case BenchmarkId::OV1:
    case BenchmarkId::OV2:
      return to_table(
          market_depth_series(books, spec.symbol, *spec.side, spec.depth_level, range, spec.inner_width));
    case BenchmarkId::ONBBO:
      return to_table(nbbo_series(books, spec.symbol, range, spec.inner_width));
    case BenchmarkId::CR: {
      const auto mids = mid_quote_points(books, spec.symbol, range);
      return to_table(log_returns(closing_prices(mids, range, spec.inner_width)));
    }
    case BenchmarkId::CVT: {
      const auto prices = trade_price_points(trades, spec.symbol, range);
      return volatility(log_returns(closing_prices(prices, range, spec.inner_width)), spec.outer_width,
                        options.stddev);
    }
    case BenchmarkId::CVO1:
    case BenchmarkId::CVO2: {
      const auto mids = mid_quote_points(books, spec.symbol, range);
      return volatility(log_returns(closing_prices(mids, range, spec.inner_width)), spec.outer_width,
                        options.stddev);
    }
    case BenchmarkId::W:
    case BenchmarkId::SE:
      break;
  }
  fail(Errc::invalid_argument, std::string(to_string(spec.id)) + " is not a read benchmark");
}

}  // namespace tickbench::analytics
