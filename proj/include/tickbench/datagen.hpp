#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tickbench/model.hpp"

// Deterministic synthetic trades and order-book snapshots.
//
// Randomness comes from std::mt19937_64, whose output sequence is fixed by
// the C++ standard; every stream is seeded with SplitMix64(seed ^ stream
// salt). Uniforms take the top 53 bits of a draw and normals use the
// Box-Muller transform, so output depends only on the config.
namespace tickbench::datagen {

struct SymbolProfile {
  std::string symbol;
  Decimal mean_price;
  Decimal mean_amount;
  /// Per-step standard deviation of the log-price walk.
  double relative_volatility = 1e-4;
  Decimal tick_size;
  /// Share of generated rows.
  double weight = 1.0;
};

/// BTC-USD, ETH-USD and USDT-USD weighted 8.81 : 10.01 : 0.76. The mean
/// prices and amounts are arbitrary placeholders.
std::vector<SymbolProfile> default_symbols();

struct GeneratorConfig {
  std::uint64_t seed = 0;
  Date day = Date{std::chrono::year{2022} / 6 / 1};
  std::uint64_t trades_rows = 1'000'000;
  std::uint64_t book_rows = 1'500'000;
  std::vector<SymbolProfile> symbols = default_symbols();
  std::vector<std::string> exchanges = {"EX1"};
};

/// Throws invalid_argument on an inconsistent config.
void validate(const GeneratorConfig& config);

namespace detail {

/// Log-space random walk pulled gently back towards the profile mean.
class PriceWalk {
 public:
  explicit PriceWalk(const SymbolProfile& profile);
  /// Advances one step and returns the new unrounded price.
  double step(double standard_normal);

 private:
  double log_mean_;
  double log_price_;
  double sigma_;
};

class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t salt);
  std::uint64_t bits() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform();
  double normal();
  std::uint64_t below(std::uint64_t bound) { return bound <= 1 ? 0 : engine_() % bound; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Strictly increasing timestamps spread over one UTC day.
class DayClock {
 public:
  DayClock(Date day, std::uint64_t rows);
  Timestamp at(std::uint64_t index, double jitter) const;

 private:
  Timestamp start_;
  std::uint64_t rows_;
};

}  // namespace detail

/// Pull-style trade generator; yields exactly config.trades_rows rows.
class TradeStream {
 public:
  explicit TradeStream(const GeneratorConfig& config);
  bool next(Trade& out);

 private:
  GeneratorConfig config_;
  detail::Rng rng_;
  detail::DayClock clock_;
  std::vector<detail::PriceWalk> walks_;
  std::vector<double> cumulative_;
  std::uint64_t emitted_ = 0;
};

/// Pull-style snapshot generator for one stream of `rows` snapshots.
class BookStream {
 public:
  explicit BookStream(const GeneratorConfig& config);
  /// A single-exchange stream used by the multi-exchange generator.
  BookStream(const GeneratorConfig& config, std::string exchange, std::uint64_t rows, std::uint64_t salt);
  bool next(BookSnapshot& out);

 private:
  GeneratorConfig config_;
  std::vector<std::string> exchanges_;
  std::uint64_t rows_;
  detail::Rng rng_;
  detail::DayClock clock_;
  std::vector<detail::PriceWalk> walks_;
  std::vector<double> cumulative_;
  std::uint64_t emitted_ = 0;
};

/// Merges `n_exchanges` independent book streams ("EX1".."EXn") by
/// timestamp; rows are split evenly with the remainder going to the
/// lowest-numbered exchanges.
class MultiExchangeBookStream {
 public:
  MultiExchangeBookStream(const GeneratorConfig& config, int n_exchanges);
  bool next(BookSnapshot& out);

 private:
  std::vector<BookStream> streams_;
  std::vector<BookSnapshot> heads_;
  std::vector<bool> live_;
};

std::vector<Trade> generate_trades(const GeneratorConfig& config);
std::vector<BookSnapshot> generate_books(const GeneratorConfig& config);
/// Throws invalid_argument when n_exchanges < 2.
std::vector<BookSnapshot> generate_multi_exchange_day(const GeneratorConfig& config, int n_exchanges);

}  // namespace tickbench::datagen
