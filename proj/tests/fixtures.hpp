#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "tickbench/model.hpp"

namespace fixtures {

using namespace tickbench;

struct Dataset {
  std::vector<Trade> trades;
  std::vector<BookSnapshot> books;
};

struct RandomOptions {
  int trades = 200;
  int books = 200;
  std::vector<std::string> symbols = {"BTC-USD", "ETH-USD"};
  std::vector<std::string> exchanges = {"EX1", "EX2", "EX3"};
  /// Chance a timestamp is snapped to a whole second, which makes ties.
  double tie_probability = 0.3;
  double one_sided_probability = 0.05;
  /// Rows come out in random order when set.
  bool shuffle = true;
};

/// Valid rows spread over `range`; prices random-walk around 100.
Dataset random_dataset(std::uint64_t seed, const TimeRange& range, const RandomOptions& options = {});

BookSnapshot make_book(Timestamp ts, std::string exchange, std::string symbol,
                       std::vector<std::pair<double, double>> bids, std::vector<std::pair<double, double>> asks);
Trade make_trade(Timestamp ts, std::string symbol, Side side, double price, double amount,
                 std::string exchange = "EX1");

Timestamp at(const std::string& iso);

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace fixtures
