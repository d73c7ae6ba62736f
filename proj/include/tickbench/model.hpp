#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tickbench {

using Duration = std::chrono::nanoseconds;
/// Nanoseconds since the Unix epoch, UTC.
using Timestamp = std::chrono::sys_time<Duration>;
using Date = std::chrono::sys_days;

inline constexpr Duration kSecond = std::chrono::seconds{1};
inline constexpr Duration kMinute = std::chrono::minutes{1};
inline constexpr Duration kHour = std::chrono::hours{1};
inline constexpr Duration kDay = std::chrono::hours{24};

/// Fixed-point decimal with 8 fractional digits.
///
/// Sums and differences are exact. Anything needing a logarithm or a
/// division converts to double at the point of use via to_double().
class Decimal {
 public:
  static constexpr int kFractionDigits = 8;
  static constexpr std::int64_t kScale = 100'000'000;

  constexpr Decimal() = default;

  static constexpr Decimal from_raw(std::int64_t raw) {
    Decimal d;
    d.raw_ = raw;
    return d;
  }
  static constexpr Decimal from_units(std::int64_t units) { return from_raw(units * kScale); }
  /// Rounds to the nearest representable value.
  static Decimal from_double(double value);
  /// Parses `[-]digits[.digits]` with at most 8 fractional digits, no exponent.
  static Decimal parse(std::string_view text);
  static std::optional<Decimal> try_parse(std::string_view text) noexcept;

  constexpr std::int64_t raw() const { return raw_; }
  double to_double() const { return static_cast<double>(raw_) / static_cast<double>(kScale); }
  /// Shortest exact text: trailing fractional zeros trimmed, no exponent.
  std::string to_string() const;
  void append_to(std::string& out) const;

  constexpr bool is_positive() const { return raw_ > 0; }

  friend constexpr Decimal operator+(Decimal a, Decimal b) { return from_raw(a.raw_ + b.raw_); }
  friend constexpr Decimal operator-(Decimal a, Decimal b) { return from_raw(a.raw_ - b.raw_); }
  friend constexpr Decimal operator*(Decimal a, std::int64_t k) { return from_raw(a.raw_ * k); }
  constexpr Decimal& operator+=(Decimal other) {
    raw_ += other.raw_;
    return *this;
  }
  friend constexpr auto operator<=>(Decimal, Decimal) = default;

 private:
  std::int64_t raw_ = 0;
};

enum class Side : std::uint8_t { Buy = 0, Sell = 1 };

std::string_view to_string(Side side) noexcept;
Side parse_side(std::string_view text);

struct Trade {
  Timestamp timestamp{};
  std::string exchange;
  std::string symbol;
  Side side = Side::Buy;
  Decimal price;
  Decimal amount;
};

struct BookLevel {
  Decimal price;
  Decimal size;

  friend bool operator==(const BookLevel&, const BookLevel&) = default;
};

inline constexpr int kBookDepth = 20;

/// One 20-level ladder. Absent levels are simply not stored: `bids` and
/// `asks` hold the present levels contiguously from level 1.
struct BookSnapshot {
  Timestamp timestamp{};
  std::string exchange;
  std::string symbol;
  std::vector<BookLevel> bids;
  std::vector<BookLevel> asks;

  bool two_sided() const { return !bids.empty() && !asks.empty(); }
};

/// Returns a description of the first violated invariant, or nullopt.
std::optional<std::string> check_snapshot(const BookSnapshot& book);
std::optional<std::string> check_trade(const Trade& trade);

struct TimeBucket {
  Timestamp start{};
  Duration width{};

  Timestamp end() const { return start + width; }
  bool contains(Timestamp ts) const { return ts >= start && ts < end(); }
  friend bool operator==(const TimeBucket&, const TimeBucket&) = default;
};

/// Half-open [begin, end).
struct TimeRange {
  Timestamp begin{};
  Timestamp end{};

  /// Throws invalid_argument unless begin < end.
  static TimeRange make(Timestamp begin, Timestamp end);
  static TimeRange days(Date first, int count);

  bool contains(Timestamp ts) const { return ts >= begin && ts < end; }
  friend bool operator==(const TimeRange&, const TimeRange&) = default;
};

/// Epoch-aligned bucket [floor(ts / width) * width, +width).
TimeBucket bucket_of(Timestamp ts, Duration width);

struct PricePoint {
  Timestamp timestamp{};
  double price = 0.0;
};

struct ClosingPrice {
  TimeBucket bucket;
  double close = 0.0;
};
using ClosingPriceSeries = std::vector<ClosingPrice>;

struct ReturnPoint {
  TimeBucket bucket;
  double value = 0.0;
};
using ReturnSeries = std::vector<ReturnPoint>;

// Text forms used by the CSV formats and query rendering.

/// `YYYY-MM-DDTHH:MM:SS.fffffffffZ`
std::string format_timestamp(Timestamp ts);
void append_timestamp(std::string& out, Timestamp ts);
/// Accepts the CSV form above, `YYYY-MM-DD HH:MM:SS[.f...]`, or a bare
/// integer nanosecond count.
Timestamp parse_timestamp(std::string_view text);
std::optional<Timestamp> try_parse_timestamp(std::string_view text) noexcept;

std::string format_date(Date day);
Date parse_date(std::string_view text);
Date day_of(Timestamp ts);
/// Same day-of-month one calendar month later, clamped to the month's end.
Date add_month(Date day);

}  // namespace tickbench
