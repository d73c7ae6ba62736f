#include "tickbench/benchmarks.hpp"

#include <array>
#include <random>

#include "tickbench/error.hpp"

namespace tickbench {

namespace {

constexpr std::array<BenchmarkInfo, 16> kTable{{
    {BenchmarkId::TV1, "T-V1", Category::Trades,
     "Average trading volume over 1 min intervals in a day", Intensity::Light, Intensity::Light},
    {BenchmarkId::TV2, "T-V2", Category::Trades, "Average daily trading volume over a month",
     Intensity::Heavy, Intensity::Light},
    {BenchmarkId::TVWAP, "T-VWAP", Category::Trades,
     "Volume Weighted Average Price (VWAP) over 1 min intervals in a day", Intensity::Light,
     Intensity::Heavy},
    {BenchmarkId::OT, "O-T", Category::OrderBook, "Produce the top of the book at a random time",
     Intensity::Light, Intensity::Light},
    {BenchmarkId::OB1, "O-B1", Category::OrderBook, "Find the highest bid price in a week",
     Intensity::Light, Intensity::Light},
    {BenchmarkId::OB2, "O-B2", Category::OrderBook, "Find the highest bid price in a month",
     Intensity::Heavy, Intensity::Light},
    {BenchmarkId::OS, "O-S", Category::OrderBook, "Bid/ask spread over a day", Intensity::Light,
     Intensity::Heavy},
    {BenchmarkId::OV1, "O-V1", Category::OrderBook,
     "Find the Market Depth at the top level using the average volume with 1 minute intervals over a "
     "week",
     Intensity::Light, Intensity::Heavy},
    {BenchmarkId::OV2, "O-V2", Category::OrderBook,
     "Find the Market Depth at the 5th level using the average volume with 1 hour intervals over a "
     "month",
     Intensity::Heavy, Intensity::Heavy},
    {BenchmarkId::ONBBO, "O-NBBO", Category::OrderBook, "National Best Bid and Offer (NBBO) for a day",
     Intensity::Light, Intensity::Light},
    {BenchmarkId::CR, "C-R", Category::ComplexQuery, "Mid-quote returns for a day in 5 min intervals",
     Intensity::Light, Intensity::Light},
    {BenchmarkId::CVT, "C-VT", Category::ComplexQuery,
     "Compute the volatility as the hourly standard deviation of execution price returns in 5 min "
     "intervals for a day", Intensity::Light,
     Intensity::Heavy},
    {BenchmarkId::CVO1, "C-VO1", Category::ComplexQuery,
     "Compute the volatility as hourly the standard deviation of mid-quote returns in 5 min intervals "
     "for a day", Intensity::Light,
     Intensity::Heavy},
    {BenchmarkId::CVO2, "C-VO2", Category::ComplexQuery,
     "Compute the volatility as 4-hourly the standard deviation of mid-quote returns in 1 hour "
     "intervals for a week", Intensity::Light,
     Intensity::Heavy},
    {BenchmarkId::W, "W", Category::Writing,
     "Write one day trades and order book data to persistent storage", Intensity::Heavy,
     Intensity::Light},
    {BenchmarkId::SE, "SE", Category::StorageEfficiency,
     "Compare disk storage space of same dataset in database and in raw data files", Intensity::None,
     Intensity::None},
}};

constexpr std::array<BenchmarkId, 14> kReads{
    BenchmarkId::TV1,  BenchmarkId::TV2,  BenchmarkId::TVWAP, BenchmarkId::OT,   BenchmarkId::OB1,
    BenchmarkId::OB2,  BenchmarkId::OS,   BenchmarkId::OV1,   BenchmarkId::OV2,  BenchmarkId::ONBBO,
    BenchmarkId::CR,   BenchmarkId::CVT,  BenchmarkId::CVO1,  BenchmarkId::CVO2,
};

std::string valid_id_list() {
  std::string out;
  for (const auto& b : kTable) {
    if (!out.empty()) out += ", ";
    out += b.name;
  }
  return out;
}

bool uses_inner_width(BenchmarkId id) {
  switch (id) {
    case BenchmarkId::TV1:
    case BenchmarkId::TV2:
    case BenchmarkId::TVWAP:
    case BenchmarkId::OV1:
    case BenchmarkId::OV2:
    case BenchmarkId::ONBBO:
    case BenchmarkId::CR:
    case BenchmarkId::CVT:
    case BenchmarkId::CVO1:
    case BenchmarkId::CVO2:
      return true;
    default:
      return false;
  }
}

bool is_volatility(BenchmarkId id) {
  return id == BenchmarkId::CVT || id == BenchmarkId::CVO1 || id == BenchmarkId::CVO2;
}

bool is_depth(BenchmarkId id) { return id == BenchmarkId::OV1 || id == BenchmarkId::OV2; }

}  // namespace

std::span<const BenchmarkInfo> benchmark_table() { return kTable; }

const BenchmarkInfo& info(BenchmarkId id) { return kTable[static_cast<std::size_t>(id)]; }

std::span<const BenchmarkId> read_benchmarks() { return kReads; }

bool is_read_benchmark(BenchmarkId id) { return id != BenchmarkId::W && id != BenchmarkId::SE; }

std::string_view to_string(BenchmarkId id) { return info(id).name; }

std::string_view to_string(Category category) {
  switch (category) {
    case Category::Trades: return "Trades";
    case Category::OrderBook: return "OrderBook";
    case Category::ComplexQuery: return "ComplexQuery";
    case Category::Writing: return "Writing";
    case Category::StorageEfficiency: return "StorageEfficiency";
  }
  return "?";
}

std::string_view to_string(Intensity intensity) {
  switch (intensity) {
    case Intensity::None: return "none";
    case Intensity::Light: return "light";
    case Intensity::Heavy: return "heavy";
  }
  return "?";
}

std::string_view to_string(TableKind kind) { return kind == TableKind::Trades ? "trades" : "books"; }

TableKind parse_table_kind(std::string_view text) {
  if (text == "trades") return TableKind::Trades;
  if (text == "books") return TableKind::Books;
  fail(Errc::invalid_argument, "table must be 'trades' or 'books', got '" + std::string(text) + "'");
}

std::optional<BenchmarkId> try_parse_benchmark_id(std::string_view text) noexcept {
  for (const auto& b : kTable) {
    if (b.name == text) return b.id;
  }
  return std::nullopt;
}

BenchmarkId parse_benchmark_id(std::string_view text) {
  if (auto id = try_parse_benchmark_id(text)) return *id;
  fail(Errc::invalid_argument,
       "unknown benchmark id '" + std::string(text) + "'; valid ids: " + valid_id_list());
}

TableKind source_table(BenchmarkId id) {
  switch (id) {
    case BenchmarkId::TV1:
    case BenchmarkId::TV2:
    case BenchmarkId::TVWAP:
    case BenchmarkId::CVT:
      return TableKind::Trades;
    default:
      return TableKind::Books;
  }
}

void validate(const BenchmarkSpec& spec) {
  const BenchmarkInfo& meta = info(spec.id);
  const std::string name(meta.name);
  auto reject = [&](const std::string& what) {
    fail(Errc::invalid_argument, "benchmark " + name + ": " + what);
  };
  if (spec.category != meta.category) reject("category does not match id");
  if (spec.io != meta.io || spec.compute != meta.compute) reject("intensity does not match id");
  if (!is_read_benchmark(spec.id)) return;
  if (!(spec.range.begin < spec.range.end)) reject("empty time range");

  if (uses_inner_width(spec.id)) {
    if (spec.inner_width.count() <= 0) reject("inner_width must be positive");
  } else if (spec.inner_width.count() != 0) {
    reject("inner_width does not apply");
  }
  if (is_volatility(spec.id)) {
    if (spec.outer_width < spec.inner_width) reject("outer_width must be >= inner_width");
  } else if (spec.outer_width.count() != 0) {
    reject("outer_width does not apply");
  }
  if (is_depth(spec.id)) {
    if (spec.depth_level < 1 || spec.depth_level > kBookDepth) reject("depth_level must be in 1..20");
    if (!spec.side) reject("side is required");
  } else if (spec.depth_level != 0) {
    reject("depth_level does not apply");
  }
  const bool volume = spec.id == BenchmarkId::TV1 || spec.id == BenchmarkId::TV2;
  if (!volume && !is_depth(spec.id) && spec.side) reject("side does not apply");
  if (spec.symbol.empty()) reject("symbol must not be empty");
  if (!volume && spec.symbol == kAllSymbols) reject("a concrete symbol is required");
  if (spec.id == BenchmarkId::OT) {
    if (!spec.rng_seed) reject("rng_seed is required");
  } else if (spec.rng_seed) {
    reject("rng_seed does not apply");
  }
}

BenchmarkSpec make_spec(BenchmarkId id, const CatalogOptions& options) {
  const BenchmarkInfo& meta = info(id);
  BenchmarkSpec spec;
  spec.id = id;
  spec.category = meta.category;
  spec.io = meta.io;
  spec.compute = meta.compute;
  spec.symbol = options.symbol;

  const Date anchor = options.anchor_day;
  const TimeRange day = TimeRange::days(anchor, 1);
  const TimeRange week = TimeRange::days(anchor, 7);
  const TimeRange month = TimeRange::make(Timestamp{anchor}, Timestamp{add_month(anchor)});

  switch (id) {
    case BenchmarkId::TV1:
      spec.range = day;
      spec.inner_width = kMinute;
      spec.symbol = std::string(kAllSymbols);
      break;
    case BenchmarkId::TV2:
      spec.range = month;
      spec.inner_width = options.hourly_tv2 ? kHour : kDay;
      spec.symbol = std::string(kAllSymbols);
      break;
    case BenchmarkId::TVWAP:
      spec.range = day;
      spec.inner_width = kMinute;
      break;
    case BenchmarkId::OT:
      spec.range = month;
      spec.rng_seed = options.top_of_book_seed;
      break;
    case BenchmarkId::OB1:
      spec.range = week;
      break;
    case BenchmarkId::OB2:
      spec.range = month;
      break;
    case BenchmarkId::OS:
      spec.range = day;
      break;
    case BenchmarkId::OV1:
      spec.range = week;
      spec.inner_width = kMinute;
      spec.depth_level = 1;
      spec.side = Side::Buy;
      break;
    case BenchmarkId::OV2:
      spec.range = month;
      spec.inner_width = kHour;
      spec.depth_level = 5;
      spec.side = Side::Buy;
      break;
    case BenchmarkId::ONBBO:
      spec.range = TimeRange::days(options.nbbo_day.value_or(anchor), 1);
      spec.inner_width = kMinute;
      break;
    case BenchmarkId::CR:
      spec.range = day;
      spec.inner_width = 5 * kMinute;
      break;
    case BenchmarkId::CVT:
    case BenchmarkId::CVO1:
      spec.range = day;
      spec.inner_width = 5 * kMinute;
      spec.outer_width = kHour;
      break;
    case BenchmarkId::CVO2:
      spec.range = week;
      spec.inner_width = kHour;
      spec.outer_width = 4 * kHour;
      break;
    case BenchmarkId::W:
    case BenchmarkId::SE:
      spec.range = day;
      spec.symbol = std::string(kAllSymbols);
      break;
  }
  validate(spec);
  return spec;
}

Timestamp draw_random_at(const BenchmarkSpec& spec) {
  if (!spec.rng_seed) fail(Errc::invalid_argument, "random timestamp needs an rng_seed");
  std::mt19937_64 rng(*spec.rng_seed);
  const auto span = static_cast<std::uint64_t>((spec.range.end - spec.range.begin).count());
  return spec.range.begin + Duration{static_cast<std::int64_t>(rng() % span)};
}

}  // namespace tickbench
