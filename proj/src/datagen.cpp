#include "tickbench/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tickbench/error.hpp"

namespace tickbench::datagen {

namespace {

constexpr double kMeanReversion = 1e-3;
constexpr double kAmountLogSigma = 0.25;
constexpr double kLevelSizeLogSigma = 0.5;
constexpr std::uint64_t kTradeSalt = 0x7472616465730000ULL;  // "trades"
constexpr std::uint64_t kBookSalt = 0x626f6f6b73000000ULL;   // "books"
constexpr std::int64_t kDayNanos = 86'400'000'000'000;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<double> cumulative_weights(const std::vector<SymbolProfile>& symbols) {
  std::vector<double> cum;
  double acc = 0.0;
  for (const auto& s : symbols) {
    acc += s.weight;
    cum.push_back(acc);
  }
  cum.back() = 1.0;
  return cum;
}

std::size_t pick(const std::vector<double>& cumulative, double u) {
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

std::vector<detail::PriceWalk> make_walks(const std::vector<SymbolProfile>& symbols) {
  std::vector<detail::PriceWalk> walks;
  walks.reserve(symbols.size());
  for (const auto& s : symbols) walks.emplace_back(s);
  return walks;
}

Decimal round_to_tick(double price, Decimal tick) {
  const auto ticks = std::max<std::int64_t>(1, std::llround(price / tick.to_double()));
  return Decimal::from_raw(ticks * tick.raw());
}

Decimal positive_decimal(double value) {
  return Decimal::from_raw(std::max<std::int64_t>(1, std::llround(value * Decimal::kScale)));
}

}  // namespace

std::vector<SymbolProfile> default_symbols() {
  constexpr double total = 8.81 + 10.01 + 0.76;
  return {
      {"BTC-USD", Decimal::parse("20000"), Decimal::parse("0.05"), 2e-4, Decimal::parse("0.01"), 8.81 / total},
      {"ETH-USD", Decimal::parse("1100"), Decimal::parse("0.5"), 3e-4, Decimal::parse("0.01"), 10.01 / total},
      {"USDT-USD", Decimal::parse("1.0001"), Decimal::parse("500"), 2e-5, Decimal::parse("0.0001"),
       0.76 / total},
  };
}

void validate(const GeneratorConfig& config) {
  auto reject = [](const std::string& what) { fail(Errc::invalid_argument, "generator config: " + what); };
  if (config.symbols.empty()) reject("at least one symbol is required");
  if (config.exchanges.empty()) reject("at least one exchange is required");
  if (Timestamp{config.day}.time_since_epoch().count() <= 0) reject("day must be after 1970-01-01");
  const auto day_ns = static_cast<std::uint64_t>(kDayNanos);
  if (config.trades_rows > day_ns || config.book_rows > day_ns) reject("more rows than nanoseconds in a day");
  double weights = 0.0;
  for (const auto& s : config.symbols) {
    if (s.symbol.empty()) reject("empty symbol");
    if (!s.mean_price.is_positive() || !s.mean_amount.is_positive() || !s.tick_size.is_positive()) {
      reject(s.symbol + ": mean_price, mean_amount and tick_size must be positive");
    }
    if (!(s.relative_volatility > 0.0 && s.relative_volatility < 1.0)) {
      reject(s.symbol + ": relative_volatility must be in (0, 1)");
    }
    // Twenty levels stepping up to three ticks each must stay above zero.
    if (s.mean_price.raw() / s.tick_size.raw() < 1000) reject(s.symbol + ": mean_price must span >= 1000 ticks");
    if (!(s.weight >= 0.0)) reject(s.symbol + ": weight must be non-negative");
    weights += s.weight;
  }
  if (std::fabs(weights - 1.0) > 1e-9) reject("symbol weights must sum to 1");
}

namespace detail {

PriceWalk::PriceWalk(const SymbolProfile& profile)
    : log_mean_(std::log(profile.mean_price.to_double())),
      log_price_(log_mean_),
      sigma_(profile.relative_volatility) {}

double PriceWalk::step(double z) {
  log_price_ += -kMeanReversion * (log_price_ - log_mean_) + sigma_ * z;
  return std::exp(log_price_);
}

Rng::Rng(std::uint64_t seed, std::uint64_t salt) : engine_(splitmix64(seed ^ salt)) {}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

DayClock::DayClock(Date day, std::uint64_t rows) : start_(Timestamp{day}), rows_(rows) {}

Timestamp DayClock::at(std::uint64_t index, double jitter) const {
  using U128 = unsigned __int128;
  const auto lo = static_cast<std::int64_t>(static_cast<U128>(index) * kDayNanos / rows_);
  const auto hi = static_cast<std::int64_t>(static_cast<U128>(index + 1) * kDayNanos / rows_);
  const auto offset = lo + static_cast<std::int64_t>(jitter * static_cast<double>(hi - lo));
  return start_ + Duration{std::min(offset, hi - 1)};
}

}  // namespace detail

// ---------------------------------------------------------------------------

TradeStream::TradeStream(const GeneratorConfig& config)
    : config_(config),
      rng_(config.seed, kTradeSalt),
      clock_(config.day, std::max<std::uint64_t>(config.trades_rows, 1)) {
  validate(config_);
  walks_ = make_walks(config_.symbols);
  cumulative_ = cumulative_weights(config_.symbols);
}

bool TradeStream::next(Trade& out) {
  if (emitted_ >= config_.trades_rows) return false;
  const std::size_t s = pick(cumulative_, rng_.uniform());
  const SymbolProfile& profile = config_.symbols[s];
  out.timestamp = clock_.at(emitted_, rng_.uniform());
  out.exchange = config_.exchanges[rng_.below(config_.exchanges.size())];
  out.symbol = profile.symbol;
  out.side = (rng_.bits() & 1U) ? Side::Sell : Side::Buy;
  out.price = round_to_tick(walks_[s].step(rng_.normal()), profile.tick_size);
  out.amount = positive_decimal(profile.mean_amount.to_double() * std::exp(kAmountLogSigma * rng_.normal()));
  ++emitted_;
  return true;
}

BookStream::BookStream(const GeneratorConfig& config)
    : BookStream(config, std::string{}, config.book_rows, 0) {}

BookStream::BookStream(const GeneratorConfig& config, std::string exchange, std::uint64_t rows,
                       std::uint64_t salt)
    : config_(config),
      rows_(rows),
      rng_(config.seed, kBookSalt + salt),
      clock_(config.day, std::max<std::uint64_t>(rows, 1)) {
  validate(config_);
  if (exchange.empty()) {
    exchanges_ = config_.exchanges;
  } else {
    exchanges_ = {std::move(exchange)};
  }
  walks_ = make_walks(config_.symbols);
  cumulative_ = cumulative_weights(config_.symbols);
}

bool BookStream::next(BookSnapshot& out) {
  if (emitted_ >= rows_) return false;
  const std::size_t s = pick(cumulative_, rng_.uniform());
  const SymbolProfile& profile = config_.symbols[s];
  const std::int64_t tick = profile.tick_size.raw();

  out.timestamp = clock_.at(emitted_, rng_.uniform());
  out.exchange = exchanges_[rng_.below(exchanges_.size())];
  out.symbol = profile.symbol;

  const double mid_ticks = walks_[s].step(rng_.normal()) / profile.tick_size.to_double();
  const auto half_spread = static_cast<double>(1 + rng_.below(2));
  auto bid_ticks = static_cast<std::int64_t>(std::floor(mid_ticks - half_spread));
  auto ask_ticks = static_cast<std::int64_t>(std::ceil(mid_ticks + half_spread));

  out.bids.clear();
  out.asks.clear();
  const double base_size = profile.mean_amount.to_double();
  for (int level = 0; level < kBookDepth; ++level) {
    if (level > 0) {
      bid_ticks -= static_cast<std::int64_t>(1 + rng_.below(3));
      ask_ticks += static_cast<std::int64_t>(1 + rng_.below(3));
    }
    const double scale = base_size * (1.0 + 0.15 * level);
    const Decimal bid_size = positive_decimal(scale * std::exp(kLevelSizeLogSigma * rng_.normal()));
    const Decimal ask_size = positive_decimal(scale * std::exp(kLevelSizeLogSigma * rng_.normal()));
    if (bid_ticks >= 1) out.bids.push_back({Decimal::from_raw(bid_ticks * tick), bid_size});
    out.asks.push_back({Decimal::from_raw(ask_ticks * tick), ask_size});
  }
  ++emitted_;
  return true;
}

MultiExchangeBookStream::MultiExchangeBookStream(const GeneratorConfig& config, int n_exchanges) {
  if (n_exchanges < 2) {
    fail(Errc::invalid_argument, "multi-exchange generation needs at least 2 exchanges, got " +
                                     std::to_string(n_exchanges));
  }
  const auto n = static_cast<std::uint64_t>(n_exchanges);
  for (std::uint64_t e = 0; e < n; ++e) {
    const std::uint64_t rows = config.book_rows / n + (e < config.book_rows % n ? 1 : 0);
    streams_.emplace_back(config, "EX" + std::to_string(e + 1), rows, e + 1);
  }
  heads_.resize(streams_.size());
  live_.resize(streams_.size());
  for (std::size_t e = 0; e < streams_.size(); ++e) live_[e] = streams_[e].next(heads_[e]);
}

bool MultiExchangeBookStream::next(BookSnapshot& out) {
  std::size_t best = streams_.size();
  for (std::size_t e = 0; e < streams_.size(); ++e) {
    if (!live_[e]) continue;
    if (best == streams_.size() || heads_[e].timestamp < heads_[best].timestamp) best = e;
  }
  if (best == streams_.size()) return false;
  out = std::move(heads_[best]);
  live_[best] = streams_[best].next(heads_[best]);
  return true;
}

std::vector<Trade> generate_trades(const GeneratorConfig& config) {
  TradeStream stream(config);
  std::vector<Trade> out;
  out.reserve(config.trades_rows);
  Trade t;
  while (stream.next(t)) out.push_back(t);
  return out;
}

std::vector<BookSnapshot> generate_books(const GeneratorConfig& config) {
  BookStream stream(config);
  std::vector<BookSnapshot> out;
  out.reserve(config.book_rows);
  BookSnapshot b;
  while (stream.next(b)) out.push_back(b);
  return out;
}

std::vector<BookSnapshot> generate_multi_exchange_day(const GeneratorConfig& config, int n_exchanges) {
  MultiExchangeBookStream stream(config, n_exchanges);
  std::vector<BookSnapshot> out;
  out.reserve(config.book_rows);
  BookSnapshot b;
  while (stream.next(b)) out.push_back(b);
  return out;
}

}  // namespace tickbench::datagen
