#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "column_store.hpp"
#include "fixtures.hpp"
#include "tickbench/error.hpp"

using namespace tickbench;
using namespace tickbench::store;

namespace {

std::vector<std::int64_t> roundtrip(const std::filesystem::path& path, ValueType type, Encoding enc,
                                    const std::vector<std::int64_t>& values, std::uint64_t* bytes = nullptr) {
  {
    ColumnWriter w(path, type, enc, false);
    for (const auto v : values) w.append(v);
    const auto n = w.close();
    if (bytes) *bytes = n;
  }
  ColumnReader r(path, type, enc, values.size());
  std::vector<std::int64_t> out(values.size() + 10);
  std::size_t got = 0;
  // Odd chunk size to cross buffer boundaries.
  while (std::size_t n = r.read(out.data() + got, std::min<std::size_t>(37, out.size() - got))) got += n;
  out.resize(got);
  EXPECT_EQ(r.remaining(), 0u);
  return out;
}

}  // namespace

TEST(ColumnStore, PlainRoundTripAndSize) {
  fixtures::TempDir dir;
  std::mt19937_64 rng(1);
  std::vector<std::int64_t> v(100'000);
  for (auto& x : v) x = static_cast<std::int64_t>(rng());
  v[0] = INT64_MIN;
  v[1] = INT64_MAX;
  std::uint64_t bytes = 0;
  EXPECT_EQ(roundtrip(dir / "a.bin", ValueType::I64, Encoding::Plain, v, &bytes), v);
  EXPECT_EQ(bytes, v.size() * 8);
  EXPECT_EQ(std::filesystem::file_size(dir / "a.bin"), bytes);

  std::vector<std::int64_t> small(5000);
  for (auto& x : small) x = static_cast<std::int64_t>(rng() % 256);
  EXPECT_EQ(roundtrip(dir / "u8.bin", ValueType::U8, Encoding::Plain, small, &bytes), small);
  EXPECT_EQ(bytes, small.size());
  for (auto& x : small) x = static_cast<std::int64_t>(rng() % 4'000'000'000ULL);
  EXPECT_EQ(roundtrip(dir / "u32.bin", ValueType::U32, Encoding::Plain, small, &bytes), small);
  EXPECT_EQ(bytes, small.size() * 4);
}

TEST(ColumnStore, DeltaRoundTripIsSmallerOnIncreasingTimestamps) {
  fixtures::TempDir dir;
  std::mt19937_64 rng(2);
  std::vector<std::int64_t> ts(200'000);
  std::int64_t t = 1'655'510'400'000'000'000;
  for (auto& x : ts) x = (t += 1 + static_cast<std::int64_t>(rng() % 1'000'000));
  std::uint64_t delta_bytes = 0;
  EXPECT_EQ(roundtrip(dir / "d.bin", ValueType::I64, Encoding::Delta, ts, &delta_bytes), ts);
  EXPECT_LT(delta_bytes, ts.size() * 4);

  std::vector<std::int64_t> mixed = {0, -1, 1, INT64_MIN, INT64_MAX, 0, INT64_MAX, INT64_MIN, 42};
  EXPECT_EQ(roundtrip(dir / "m.bin", ValueType::I64, Encoding::Delta, mixed), mixed);
  EXPECT_TRUE(roundtrip(dir / "e.bin", ValueType::I64, Encoding::Delta, {}).empty());
}

TEST(ColumnStore, TruncatedFileIsInvalidData) {
  fixtures::TempDir dir;
  std::vector<std::int64_t> v(100, 7);
  roundtrip(dir / "a.bin", ValueType::I64, Encoding::Plain, v);
  std::filesystem::resize_file(dir / "a.bin", 100 * 8 - 3);
  ColumnReader r(dir / "a.bin", ValueType::I64, Encoding::Plain, 100);
  std::vector<std::int64_t> out(100);
  EXPECT_THROW(
      {
        std::size_t got = 0;
        while (std::size_t n = r.read(out.data() + got, out.size() - got)) got += n;
      },
      Error);
}

TEST(ColumnStore, Dictionary) {
  fixtures::TempDir dir;
  const std::vector<std::string> entries = {"BTC-USD", "ETH-USD", "USDT-USD"};
  write_dictionary(dir / "symbol.dict", entries, false);
  EXPECT_EQ(read_dictionary(dir / "symbol.dict"), entries);
  write_dictionary(dir / "empty.dict", {}, false);
  EXPECT_TRUE(read_dictionary(dir / "empty.dict").empty());
}

TEST(ColumnStore, Layout) {
  EXPECT_EQ(table_columns(TableKind::Trades).size(), 6u);
  EXPECT_EQ(table_columns(TableKind::Books).size(), 83u);
  EXPECT_EQ(column_index(TableKind::Trades, "price"), 4u);
  EXPECT_EQ(table_columns(TableKind::Books)[book_price_column(0, 1)].name, "b1price");
  EXPECT_EQ(table_columns(TableKind::Books)[book_size_column(1, 20)].name, "a20size");
  EXPECT_TRUE(table_columns(TableKind::Trades)[1].dictionary);
  EXPECT_EQ(parse_encoding("delta"), Encoding::Delta);
  EXPECT_EQ(to_string(Encoding::Plain), "plain");
  EXPECT_THROW(parse_encoding("zstd"), Error);
}
