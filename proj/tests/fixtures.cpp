#include "fixtures.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fixtures {

namespace {

Decimal dec(double v) { return Decimal::from_double(v); }

std::vector<BookLevel> ladder(std::mt19937_64& rng, double start, double step_sign, int levels) {
  std::uniform_int_distribution<int> ticks(1, 4);
  std::uniform_int_distribution<int> size(1, 50000);
  std::vector<BookLevel> out;
  double p = start;
  for (int i = 0; i < levels; ++i) {
    out.push_back({dec(p), Decimal::from_raw(static_cast<std::int64_t>(size(rng)) * 100000)});
    p += step_sign * 0.01 * ticks(rng);
  }
  return out;
}

}  // namespace

Dataset random_dataset(std::uint64_t seed, const TimeRange& range, const RandomOptions& o) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> step(0.0, 0.002);
  const std::int64_t span = (range.end - range.begin).count();
  auto timestamp = [&] {
    std::int64_t off = static_cast<std::int64_t>(unit(rng) * static_cast<double>(span));
    if (unit(rng) < o.tie_probability) off -= off % 1'000'000'000;
    return range.begin + Duration{std::clamp<std::int64_t>(off, 0, span - 1)};
  };
  auto pick = [&](const std::vector<std::string>& v) { return v[rng() % v.size()]; };

  Dataset d;
  std::vector<double> level(o.symbols.size(), 100.0);
  for (int i = 0; i < o.trades; ++i) {
    const std::size_t s = rng() % o.symbols.size();
    level[s] = std::max(1.0, level[s] * std::exp(step(rng)));
    Trade t;
    t.timestamp = timestamp();
    t.exchange = pick(o.exchanges);
    t.symbol = o.symbols[s];
    t.side = rng() % 2 ? Side::Sell : Side::Buy;
    t.price = dec(std::round(level[s] * 100.0) / 100.0);
    t.amount = Decimal::from_raw(static_cast<std::int64_t>(1 + rng() % 1'000'000) * 100);
    d.trades.push_back(std::move(t));
  }
  for (int i = 0; i < o.books; ++i) {
    const std::size_t s = rng() % o.symbols.size();
    level[s] = std::max(1.0, level[s] * std::exp(step(rng)));
    const double mid = std::round(level[s] * 100.0) / 100.0;
    BookSnapshot b;
    b.timestamp = timestamp();
    b.exchange = pick(o.exchanges);
    b.symbol = o.symbols[s];
    const int nb = 1 + static_cast<int>(rng() % 20);
    const int na = 1 + static_cast<int>(rng() % 20);
    b.bids = ladder(rng, mid - 0.01 * (1 + rng() % 3), -1.0, nb);
    b.asks = ladder(rng, mid + 0.01 * (1 + rng() % 3), 1.0, na);
    if (unit(rng) < o.one_sided_probability) {
      if (rng() % 2)
        b.bids.clear();
      else
        b.asks.clear();
    }
    d.books.push_back(std::move(b));
  }
  if (!o.shuffle) {
    auto by_time = [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; };
    std::stable_sort(d.trades.begin(), d.trades.end(), by_time);
    std::stable_sort(d.books.begin(), d.books.end(), by_time);
  }
  return d;
}

BookSnapshot make_book(Timestamp ts, std::string exchange, std::string symbol,
                       std::vector<std::pair<double, double>> bids, std::vector<std::pair<double, double>> asks) {
  BookSnapshot b;
  b.timestamp = ts;
  b.exchange = std::move(exchange);
  b.symbol = std::move(symbol);
  for (const auto& [p, s] : bids) b.bids.push_back({dec(p), dec(s)});
  for (const auto& [p, s] : asks) b.asks.push_back({dec(p), dec(s)});
  return b;
}

Trade make_trade(Timestamp ts, std::string symbol, Side side, double price, double amount, std::string exchange) {
  Trade t;
  t.timestamp = ts;
  t.exchange = std::move(exchange);
  t.symbol = std::move(symbol);
  t.side = side;
  t.price = dec(price);
  t.amount = dec(amount);
  return t;
}

Timestamp at(const std::string& iso) { return parse_timestamp(iso); }

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("tickbench-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace fixtures
