#include "identities.hpp"

#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "tickbench/analytics.hpp"

namespace identities {

using namespace tickbench;
namespace an = tickbench::analytics;

namespace {

const TimeRange& day() {
  static const TimeRange r = TimeRange::days(parse_date("2022-06-18"), 1);
  return r;
}

fixtures::Dataset draw(std::uint64_t seed, int trades, int books, int exchanges = 3) {
  fixtures::RandomOptions o;
  o.trades = trades;
  o.books = books;
  o.symbols = {"BTC-USD"};
  o.exchanges.clear();
  for (int i = 1; i <= exchanges; ++i) o.exchanges.push_back("EX" + std::to_string(i));
  return fixtures::random_dataset(seed, day(), o);
}

Duration pick_width(std::uint64_t seed) {
  static const Duration widths[] = {kMinute, 5 * kMinute, 15 * kMinute, kHour};
  return widths[seed % std::size(widths)];
}

void record(Outcome& o, std::uint64_t seed, const std::string& what) {
  if (o.failures++ == 0) o.first_failure = "seed " + std::to_string(seed) + ": " + what;
}

template <typename F>
Outcome repeat(std::uint64_t seed, std::size_t cases, F check) {
  Outcome o;
  std::mt19937_64 seeds(seed);
  for (std::size_t i = 0; i < cases; ++i) {
    const std::uint64_t s = seeds();
    std::string failure;
    check(s, failure);
    ++o.cases;
    if (!failure.empty()) record(o, s, failure);
  }
  return o;
}

Decimal times(Decimal d, int k) { return Decimal::from_raw(d.raw() * k); }

}  // namespace

Outcome telescoping(std::uint64_t seed, std::size_t cases) {
  return repeat(seed, cases, [](std::uint64_t s, std::string& failure) {
    const auto d = draw(s, 40 + static_cast<int>(s % 200), 0);
    const auto closes = an::closing_prices(an::trade_price_points(d.trades, "BTC-USD", day()), day(), pick_width(s));
    const auto returns = an::log_returns(closes);
    if (returns.size() + 1 != closes.size()) {
      failure = "return count";
      return;
    }
    long double sum = 0, scale = 0;
    for (const auto& r : returns) {
      sum += r.value;
      scale += std::fabs(r.value);
    }
    const long double expected = std::log(static_cast<long double>(closes.back().close)) -
                                 std::log(static_cast<long double>(closes.front().close));
    const long double tol = 1e-9L * std::max({std::fabs(expected), scale, 1e-300L});
    if (std::fabs(sum - expected) > tol) {
      std::ostringstream m;
      m << "sum " << static_cast<double>(sum) << " vs " << static_cast<double>(expected);
      failure = m.str();
    }
  });
}

Outcome scale_invariance(std::uint64_t seed, std::size_t cases, int k) {
  return repeat(seed, cases, [k](std::uint64_t s, std::string& failure) {
    const auto d = draw(s, 150, 150);
    auto scaled = d;
    for (auto& t : scaled.trades) t.price = times(t.price, k);
    for (auto& b : scaled.books) {
      for (auto& l : b.bids) l.price = times(l.price, k);
      for (auto& l : b.asks) l.price = times(l.price, k);
    }
    for (const BenchmarkId id : {BenchmarkId::CR, BenchmarkId::CVT, BenchmarkId::CVO1}) {
      const auto a = an::run_benchmark(make_spec(id), d.trades, d.books);
      const auto b = an::run_benchmark(make_spec(id), scaled.trades, scaled.books);
      if (a.rows.size() != b.rows.size()) {
        failure = std::string(to_string(id)) + " row count";
        return;
      }
      for (std::size_t r = 0; r < a.rows.size(); ++r) {
        if (a.rows[r][0] != b.rows[r][0]) {
          failure = std::string(to_string(id)) + " bucket";
          return;
        }
        const double x = std::get<double>(a.rows[r][1]);
        const double y = std::get<double>(b.rows[r][1]);
        if (std::fabs(x - y) > 1e-12) {
          std::ostringstream m;
          m << to_string(id) << " row " << r << ": " << x << " vs " << y;
          failure = m.str();
          return;
        }
      }
    }
  });
}

Outcome vwap_bounds(std::uint64_t seed, std::size_t cases) {
  return repeat(seed, cases, [](std::uint64_t s, std::string& failure) {
    const auto d = draw(s, 50 + static_cast<int>(s % 300), 0);
    const Duration w = pick_width(s);
    const auto t = an::vwap_by_bucket(d.trades, day(), w, "BTC-USD");
    for (const auto& row : t.rows) {
      const Timestamp start = std::get<Timestamp>(row[0]);
      Decimal lo = Decimal::from_raw(INT64_MAX), hi = Decimal::from_raw(0);
      for (const auto& tr : d.trades) {
        if (tr.timestamp < start || tr.timestamp >= start + w) continue;
        lo = std::min(lo, tr.price);
        hi = std::max(hi, tr.price);
      }
      // The quotient is rounded once more than the bounds are, so allow one ulp.
      const double v = std::get<double>(row[1]);
      const double lo_d = std::nextafter(lo.to_double(), 0.0);
      const double hi_d = std::nextafter(hi.to_double(), HUGE_VAL);
      if (!(v >= lo_d && v <= hi_d)) {
        std::ostringstream m;
        m.precision(17);
        m << "vwap " << v << " outside [" << lo.to_string() << ", " << hi.to_string() << "]";
        failure = m.str();
        return;
      }
    }
  });
}

Outcome depth_monotone(std::uint64_t seed, std::size_t cases) {
  return repeat(seed, cases, [](std::uint64_t s, std::string& failure) {
    const auto d = draw(s, 0, 30);
    const Duration w = pick_width(s);
    for (const Side side : {Side::Buy, Side::Sell}) {
      auto prev = an::market_depth_series(d.books, "BTC-USD", side, 1, day(), w);
      for (int level = 2; level <= kBookDepth; ++level) {
        const auto cur = an::market_depth_series(d.books, "BTC-USD", side, level, day(), w);
        if (cur.size() != prev.size()) {
          failure = "bucket count differs at level " + std::to_string(level);
          return;
        }
        for (std::size_t i = 0; i < cur.size(); ++i) {
          if (cur[i].bucket != prev[i].bucket || cur[i].avg_depth < prev[i].avg_depth || prev[i].avg_depth < 0) {
            failure = "level " + std::to_string(level) + " bucket " + std::to_string(i);
            return;
          }
        }
        prev = cur;
      }
    }
  });
}

Outcome nbbo_dominance(std::uint64_t seed, std::size_t cases) {
  return repeat(seed, cases, [](std::uint64_t s, std::string& failure) {
    const auto d = draw(s, 0, 60 + static_cast<int>(s % 100), 2 + static_cast<int>(s % 4));
    const Duration w = pick_width(s);
    const auto quotes = an::nbbo_series(d.books, "BTC-USD", day(), w);
    for (const auto& q : quotes) {
      // Last two-sided snapshot per exchange; later rows win ties.
      std::map<std::string, const BookSnapshot*> last;
      for (const auto& b : d.books) {
        if (!q.bucket.contains(b.timestamp) || b.bids.empty() || b.asks.empty()) continue;
        auto& slot = last[b.exchange];
        if (!slot || b.timestamp >= slot->timestamp) slot = &b;
      }
      bool bid_hit = false, ask_hit = false;
      for (const auto& [ex, b] : last) {
        if (b->bids[0].price > q.best_bid || b->asks[0].price < q.best_ask) {
          failure = "exchange " + ex + " beats the consolidated quote";
          return;
        }
        bid_hit |= b->bids[0].price == q.best_bid;
        ask_hit |= b->asks[0].price == q.best_ask;
      }
      if (!bid_hit || !ask_hit) {
        failure = "consolidated quote not attained at " + format_timestamp(q.bucket.start);
        return;
      }
    }
  });
}

Outcome volume_additivity(std::uint64_t seed, std::size_t cases) {
  return repeat(seed, cases, [](std::uint64_t s, std::string& failure) {
    fixtures::RandomOptions o;
    o.trades = 100 + static_cast<int>(s % 200);
    o.books = 0;
    const auto d = fixtures::random_dataset(s, day(), o);
    const auto fine = an::volume_by_bucket(d.trades, day(), pick_width(s), "*", std::nullopt);
    const auto whole = an::volume_by_bucket(d.trades, day(), kDay, "*", std::nullopt);
    std::map<std::pair<std::string, std::string>, std::int64_t> sums;
    for (const auto& row : fine.rows)
      sums[{std::get<std::string>(row[1]), std::get<std::string>(row[2])}] += std::get<Decimal>(row[3]).raw();
    if (sums.size() != whole.rows.size()) {
      failure = "group count";
      return;
    }
    for (const auto& row : whole.rows) {
      const auto key = std::make_pair(std::get<std::string>(row[1]), std::get<std::string>(row[2]));
      if (sums[key] != std::get<Decimal>(row[3]).raw()) {
        failure = "volume differs for " + key.first + " " + key.second;
        return;
      }
    }
  });
}

}  // namespace identities
