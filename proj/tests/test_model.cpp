#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "tickbench/error.hpp"
#include "tickbench/model.hpp"

using namespace tickbench;
using fixtures::at;

TEST(Decimal, ParsesAndFormatsShortestExactText) {
  EXPECT_EQ(Decimal::parse("100").raw(), 100 * Decimal::kScale);
  EXPECT_EQ(Decimal::parse("0.00000001").raw(), 1);
  EXPECT_EQ(Decimal::parse("-2.5").raw(), -250'000'000);
  EXPECT_EQ(Decimal::parse("101.10").to_string(), "101.1");
  EXPECT_EQ(Decimal::parse("7").to_string(), "7");
  EXPECT_EQ(Decimal::from_raw(-1).to_string(), "-0.00000001");
}

TEST(Decimal, RejectsMalformedText) {
  for (const char* bad : {"", "1e5", "1.123456789", "abc", "1.", ".5x", "--1"})
    EXPECT_FALSE(Decimal::try_parse(bad).has_value()) << bad;
  EXPECT_THROW(Decimal::parse("x"), Error);
}

TEST(Decimal, TextRoundTripsForRandomValues) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const auto raw = static_cast<std::int64_t>(rng() % 1'000'000'000'000'000) - 500'000'000'000'000;
    const Decimal d = Decimal::from_raw(raw);
    EXPECT_EQ(Decimal::parse(d.to_string()), d);
  }
}

TEST(Decimal, FromDoubleRounds) {
  EXPECT_EQ(Decimal::from_double(0.1).raw(), 10'000'000);
  EXPECT_EQ(Decimal::from_double(29999.99).to_string(), "29999.99");
}

TEST(Timestamp, FormatsAndParses) {
  const Timestamp t = at("2022-06-18T12:34:56.123456789Z");
  EXPECT_EQ(format_timestamp(t), "2022-06-18T12:34:56.123456789Z");
  EXPECT_EQ(at("2022-06-18 00:00:00"), Timestamp{Date{std::chrono::year{2022} / 6 / 18}});
  EXPECT_EQ(at("2022-06-18"), at("2022-06-18T00:00:00Z"));
  EXPECT_EQ(parse_timestamp("1655510400000000000"), at("2022-06-18"));
  EXPECT_FALSE(try_parse_timestamp("2022-06-18T25:00:00Z"));
  EXPECT_FALSE(try_parse_timestamp("2022-06-18T00:00:00.1234567891Z"));
}

TEST(Dates, MonthArithmetic) {
  EXPECT_EQ(format_date(add_month(parse_date("2022-06-18"))), "2022-07-18");
  EXPECT_EQ(format_date(day_of(at("2022-06-18T23:59:59.999999999Z"))), "2022-06-18");
}

TEST(TimeRange, IsHalfOpenAndValidated) {
  const TimeRange r = TimeRange::days(parse_date("2022-06-18"), 1);
  EXPECT_TRUE(r.contains(at("2022-06-18")));
  EXPECT_FALSE(r.contains(at("2022-06-19")));
  EXPECT_THROW(TimeRange::make(r.end, r.begin), Error);
  EXPECT_THROW(TimeRange::make(r.begin, r.begin), Error);
}

TEST(Buckets, EpochAligned) {
  const TimeBucket b = bucket_of(at("2022-06-18T10:07:31Z"), 5 * kMinute);
  EXPECT_EQ(b.start, at("2022-06-18T10:05:00Z"));
  EXPECT_EQ(b.end(), at("2022-06-18T10:10:00Z"));
  EXPECT_EQ(bucket_of(at("2022-06-18T10:05:00Z"), 5 * kMinute).start, at("2022-06-18T10:05:00Z"));
  EXPECT_THROW(bucket_of(at("2022-06-18"), Duration{0}), Error);
}

// Idempotence on bucket starts and the partition property.
TEST(Buckets, PartitionPropertyOverRandomInputs) {
  std::mt19937_64 rng(11);
  const Duration widths[] = {Duration{1}, Duration{7}, kSecond, kMinute, 5 * kMinute, kHour, 4 * kHour, kDay};
  for (int i = 0; i < 5000; ++i) {
    const Duration w = widths[rng() % std::size(widths)];
    const Timestamp ts{Duration{static_cast<std::int64_t>(rng() % 4'000'000'000'000'000'000ULL)}};
    const TimeBucket b = bucket_of(ts, w);
    ASSERT_TRUE(b.contains(ts));
    ASSERT_EQ(b.start.time_since_epoch().count() % w.count(), 0);
    ASSERT_EQ(bucket_of(b.start, w).start, b.start);
    // Neighbours do not overlap.
    ASSERT_EQ(bucket_of(b.end(), w).start, b.end());
    ASSERT_EQ(bucket_of(b.start - Duration{1}, w).end(), b.start);
  }
}

TEST(Snapshot, ReferenceOrderBookIsValid) {
  const auto b = fixtures::make_book(at("2022-06-18T00:00:01Z"), "EX1", "BTC-USD",
                                     {{100, 500}, {99, 1000}, {98, 1500}}, {{101, 200}, {102, 800}, {104, 2500}});
  EXPECT_FALSE(check_snapshot(b));
}

TEST(Snapshot, InvariantViolationsAreDescribed) {
  const Timestamp t = at("2022-06-18T00:00:01Z");
  EXPECT_TRUE(check_snapshot(fixtures::make_book(t, "EX1", "S", {{101, 1}}, {{100, 1}})));
  EXPECT_TRUE(check_snapshot(fixtures::make_book(t, "EX1", "S", {{100, 1}}, {{100, 1}})));
  EXPECT_TRUE(check_snapshot(fixtures::make_book(t, "EX1", "S", {{99, 1}, {100, 1}}, {{101, 1}})));
  EXPECT_TRUE(check_snapshot(fixtures::make_book(t, "EX1", "S", {{100, 1}}, {{102, 1}, {101, 1}})));
  EXPECT_TRUE(check_snapshot(fixtures::make_book(t, "EX1", "S", {{100, 0}}, {{101, 1}})));
  EXPECT_TRUE(check_snapshot(fixtures::make_book(t, "EX1", "S", {{-1, 1}}, {})));
  std::vector<std::pair<double, double>> deep;
  for (int i = 0; i < 21; ++i) deep.push_back({100.0 - i, 1});
  EXPECT_TRUE(check_snapshot(fixtures::make_book(t, "EX1", "S", deep, {})));
  EXPECT_FALSE(check_snapshot(fixtures::make_book(t, "EX1", "S", {}, {{101, 1}})));
}

TEST(Trade, InvariantViolations) {
  EXPECT_FALSE(check_trade(fixtures::make_trade(at("2022-06-18T00:00:01Z"), "BTC-USD", Side::Buy, 10, 1)));
  EXPECT_TRUE(check_trade(fixtures::make_trade(at("2022-06-18T00:00:01Z"), "BTC-USD", Side::Buy, 0, 1)));
  EXPECT_TRUE(check_trade(fixtures::make_trade(at("2022-06-18T00:00:01Z"), "BTC-USD", Side::Buy, 10, 0)));
}

TEST(Side, TextForms) {
  EXPECT_EQ(parse_side("buy"), Side::Buy);
  EXPECT_EQ(parse_side("sell"), Side::Sell);
  EXPECT_THROW(parse_side("bid"), Error);
}
