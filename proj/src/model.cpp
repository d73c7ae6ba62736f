#include "tickbench/model.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include "tickbench/error.hpp"

namespace tickbench {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::not_found: return "not-found";
    case Errc::invalid_data: return "invalid-data";
    case Errc::io: return "io";
    case Errc::config: return "config";
    case Errc::schema_mismatch: return "schema-mismatch";
    case Errc::query: return "query";
    case Errc::unsupported: return "unsupported";
    case Errc::connection: return "connection";
    case Errc::already_exists: return "already-exists";
    case Errc::internal: return "internal";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Decimal

Decimal Decimal::from_double(double value) {
  const double scaled = std::round(value * static_cast<double>(kScale));
  if (!std::isfinite(scaled) || std::fabs(scaled) > 9.0e18) {
    fail(Errc::invalid_argument, "decimal out of range: " + std::to_string(value));
  }
  return from_raw(static_cast<std::int64_t>(scaled));
}

std::optional<Decimal> Decimal::try_parse(std::string_view text) noexcept {
  if (text.empty()) return std::nullopt;
  bool negative = false;
  std::size_t i = 0;
  if (text[0] == '-') {
    negative = true;
    i = 1;
  }
  std::int64_t whole = 0;
  std::size_t whole_digits = 0;
  for (; i < text.size() && text[i] != '.'; ++i) {
    const char c = text[i];
    if (c < '0' || c > '9') return std::nullopt;
    if (++whole_digits > 10) return std::nullopt;
    whole = whole * 10 + (c - '0');
  }
  std::int64_t frac = 0;
  int frac_digits = 0;
  if (i < text.size()) {
    ++i;  // '.'
    if (i == text.size()) return std::nullopt;
    for (; i < text.size(); ++i) {
      const char c = text[i];
      if (c < '0' || c > '9') return std::nullopt;
      if (++frac_digits > kFractionDigits) return std::nullopt;
      frac = frac * 10 + (c - '0');
    }
  }
  if (whole_digits == 0 && frac_digits == 0) return std::nullopt;
  for (int k = frac_digits; k < kFractionDigits; ++k) frac *= 10;
  const std::int64_t raw = whole * kScale + frac;
  return from_raw(negative ? -raw : raw);
}

Decimal Decimal::parse(std::string_view text) {
  if (auto d = try_parse(text)) return *d;
  fail(Errc::invalid_data, "malformed decimal '" + std::string(text) + "'");
}

void Decimal::append_to(std::string& out) const {
  std::uint64_t magnitude = raw_ < 0 ? static_cast<std::uint64_t>(-(raw_ + 1)) + 1
                                     : static_cast<std::uint64_t>(raw_);
  if (raw_ < 0) out.push_back('-');
  const std::uint64_t whole = magnitude / static_cast<std::uint64_t>(kScale);
  std::uint64_t frac = magnitude % static_cast<std::uint64_t>(kScale);
  char buf[24];
  auto res = std::to_chars(buf, buf + sizeof buf, whole);
  out.append(buf, res.ptr);
  if (frac == 0) return;
  char digits[kFractionDigits];
  for (int k = kFractionDigits - 1; k >= 0; --k) {
    digits[k] = static_cast<char>('0' + frac % 10);
    frac /= 10;
  }
  int len = kFractionDigits;
  while (digits[len - 1] == '0') --len;
  out.push_back('.');
  out.append(digits, static_cast<std::size_t>(len));
}

std::string Decimal::to_string() const {
  std::string s;
  append_to(s);
  return s;
}

// ---------------------------------------------------------------------------
// Side and row checks

std::string_view to_string(Side side) noexcept { return side == Side::Buy ? "buy" : "sell"; }

Side parse_side(std::string_view text) {
  if (text == "buy") return Side::Buy;
  if (text == "sell") return Side::Sell;
  fail(Errc::invalid_data, "side must be 'buy' or 'sell', got '" + std::string(text) + "'");
}

std::optional<std::string> check_trade(const Trade& trade) {
  if (trade.timestamp.time_since_epoch().count() <= 0) return "timestamp must be positive";
  if (!trade.price.is_positive()) return "price must be positive";
  if (!trade.amount.is_positive()) return "amount must be positive";
  return std::nullopt;
}

std::optional<std::string> check_snapshot(const BookSnapshot& book) {
  if (book.timestamp.time_since_epoch().count() <= 0) return "timestamp must be positive";
  if (book.bids.size() > kBookDepth || book.asks.size() > kBookDepth) {
    return "more than 20 levels on one side";
  }
  auto check_side = [](const std::vector<BookLevel>& levels, bool descending,
                       const char* name) -> std::optional<std::string> {
    for (std::size_t i = 0; i < levels.size(); ++i) {
      if (!levels[i].price.is_positive() || !levels[i].size.is_positive()) {
        return std::string(name) + " level " + std::to_string(i + 1) + " has non-positive price or size";
      }
      if (i > 0) {
        const bool ordered = descending ? levels[i].price < levels[i - 1].price
                                        : levels[i].price > levels[i - 1].price;
        if (!ordered) {
          return std::string(name) + " prices not strictly " +
                 (descending ? "decreasing" : "increasing") + " at level " + std::to_string(i + 1);
        }
      }
    }
    return std::nullopt;
  };
  if (auto v = check_side(book.bids, true, "bid")) return v;
  if (auto v = check_side(book.asks, false, "ask")) return v;
  if (book.two_sided() && !(book.bids.front().price < book.asks.front().price)) {
    return "crossed book: best bid " + book.bids.front().price.to_string() + " >= best ask " +
           book.asks.front().price.to_string();
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Ranges and buckets

TimeRange TimeRange::make(Timestamp begin, Timestamp end) {
  if (!(begin < end)) {
    fail(Errc::invalid_argument,
         "time range must satisfy begin < end (" + format_timestamp(begin) + ", " +
             format_timestamp(end) + ")");
  }
  return TimeRange{begin, end};
}

TimeRange TimeRange::days(Date first, int count) {
  const Timestamp begin{first};
  return make(begin, begin + kDay * count);
}

TimeBucket bucket_of(Timestamp ts, Duration width) {
  if (width.count() <= 0) fail(Errc::invalid_argument, "bucket width must be positive");
  const std::int64_t t = ts.time_since_epoch().count();
  const std::int64_t w = width.count();
  std::int64_t q = t / w;
  if (t % w != 0 && t < 0) --q;
  return TimeBucket{Timestamp{Duration{q * w}}, width};
}

// ---------------------------------------------------------------------------
// Dates and timestamps

namespace {

void append_padded(std::string& out, std::int64_t value, int width) {
  char buf[20];
  for (int k = width - 1; k >= 0; --k) {
    buf[k] = static_cast<char>('0' + value % 10);
    value /= 10;
  }
  out.append(buf, static_cast<std::size_t>(width));
}

bool read_fixed(std::string_view s, std::size_t pos, int width, int& out) {
  if (pos + static_cast<std::size_t>(width) > s.size()) return false;
  int v = 0;
  for (int k = 0; k < width; ++k) {
    const char c = s[pos + static_cast<std::size_t>(k)];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  return true;
}

std::optional<Date> try_parse_date_prefix(std::string_view s) {
  int y = 0, m = 0, d = 0;
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  if (!read_fixed(s, 0, 4, y) || !read_fixed(s, 5, 2, m) || !read_fixed(s, 8, 2, d)) {
    return std::nullopt;
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date{ymd};
}

}  // namespace

Date day_of(Timestamp ts) { return std::chrono::floor<std::chrono::days>(ts); }

std::string format_date(Date day) {
  const std::chrono::year_month_day ymd{day};
  std::string out;
  append_padded(out, static_cast<int>(ymd.year()), 4);
  out.push_back('-');
  append_padded(out, static_cast<unsigned>(ymd.month()), 2);
  out.push_back('-');
  append_padded(out, static_cast<unsigned>(ymd.day()), 2);
  return out;
}

Date parse_date(std::string_view text) {
  if (text.size() == 10) {
    if (auto d = try_parse_date_prefix(text)) return *d;
  }
  fail(Errc::invalid_argument, "expected date YYYY-MM-DD, got '" + std::string(text) + "'");
}

Date add_month(Date day) {
  using namespace std::chrono;
  const year_month_day ymd{day};
  const year_month next = year_month{ymd.year(), ymd.month()} + months{1};
  const year_month_day_last last{next / std::chrono::last};
  const std::chrono::day dd = ymd.day() > last.day() ? last.day() : ymd.day();
  return Date{next / dd};
}

void append_timestamp(std::string& out, Timestamp ts) {
  const Date day = day_of(ts);
  const std::int64_t tod = (ts - Timestamp{day}).count();
  out += format_date(day);
  out.push_back('T');
  const std::int64_t secs = tod / 1'000'000'000;
  append_padded(out, secs / 3600, 2);
  out.push_back(':');
  append_padded(out, (secs / 60) % 60, 2);
  out.push_back(':');
  append_padded(out, secs % 60, 2);
  out.push_back('.');
  append_padded(out, tod % 1'000'000'000, 9);
  out.push_back('Z');
}

std::string format_timestamp(Timestamp ts) {
  std::string out;
  out.reserve(30);
  append_timestamp(out, ts);
  return out;
}

std::optional<Timestamp> try_parse_timestamp(std::string_view s) noexcept {
  if (s.empty()) return std::nullopt;
  if (s.find('-', 1) == std::string_view::npos) {
    std::int64_t ns = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), ns);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
    return Timestamp{Duration{ns}};
  }
  auto day = try_parse_date_prefix(s);
  if (!day) return std::nullopt;
  if (s.size() == 10) return Timestamp{*day};
  if (s[10] != 'T' && s[10] != ' ') return std::nullopt;
  int hh = 0, mm = 0, ss = 0;
  if (s.size() < 19 || s[13] != ':' || s[16] != ':' || !read_fixed(s, 11, 2, hh) ||
      !read_fixed(s, 14, 2, mm) || !read_fixed(s, 17, 2, ss) || hh > 23 || mm > 59 || ss > 59) {
    return std::nullopt;
  }
  std::size_t pos = 19;
  std::int64_t frac = 0;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    int digits = 0;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
      if (++digits > 9) return std::nullopt;
      frac = frac * 10 + (s[pos] - '0');
      ++pos;
    }
    if (digits == 0) return std::nullopt;
    for (int k = digits; k < 9; ++k) frac *= 10;
  }
  if (pos < s.size() && s[pos] == 'Z') ++pos;
  if (pos != s.size()) return std::nullopt;
  const std::int64_t tod = ((static_cast<std::int64_t>(hh) * 60 + mm) * 60 + ss) * 1'000'000'000 + frac;
  return Timestamp{*day} + Duration{tod};
}

Timestamp parse_timestamp(std::string_view text) {
  if (auto ts = try_parse_timestamp(text)) return *ts;
  fail(Errc::invalid_data, "malformed timestamp '" + std::string(text) + "'");
}

}  // namespace tickbench
