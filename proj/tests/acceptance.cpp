// Acceptance suite: one PASS/FAIL line per criterion, exit 0 only when all
// pass. Runs against the embedded backend and the tickbench binary only.

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "identities.hpp"
#include "oracle.hpp"
#include "stub_backend.hpp"
#include "tickbench/backends.hpp"
#include "tickbench/csv.hpp"
#include "tickbench/datagen.hpp"
#include "tickbench/engine.hpp"
#include "tickbench/error.hpp"
#include "tickbench/harness.hpp"

namespace fs = std::filesystem;
using namespace tickbench;
using json = nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Shell {
  int code = -1;
  std::string out;
};

// Runs the CLI; stderr is left alone so failures show in the ctest log.
Shell tickbench_cli(const std::string& args) {
  const std::string cmd = std::string("'") + TICKBENCH_CLI + "' " + args;
  Shell s;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return s;
  std::array<char, 65536> buf{};
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), p)) s.out.append(buf.data(), n);
  const int status = pclose(p);
  s.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return s;
}

std::vector<json> json_lines(const std::string& text) {
  std::vector<json> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) out.push_back(json::parse(line));
  return out;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

void write_csv(const fs::path& path, const std::vector<Trade>& trades) {
  csv::Writer w(path, TableKind::Trades);
  for (const auto& t : trades) w.write(t);
  w.close();
}

void write_csv(const fs::path& path, const std::vector<BookSnapshot>& books) {
  csv::Writer w(path, TableKind::Books);
  for (const auto& b : books) w.write(b);
  w.close();
}

bool same_bytes(const fs::path& a, const fs::path& b) {
  if (fs::file_size(a) != fs::file_size(b)) return false;
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  std::vector<char> x(1 << 20), y(1 << 20);
  while (fa && fb) {
    fa.read(x.data(), static_cast<std::streamsize>(x.size()));
    fb.read(y.data(), static_cast<std::streamsize>(y.size()));
    if (fa.gcount() != fb.gcount() || !std::equal(x.begin(), x.begin() + fa.gcount(), y.begin())) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

Verdict oracle_equivalence() {
  const auto t0 = Clock::now();
  std::size_t compared = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    fixtures::Dataset d;
    if (seed % 2 == 1) {
      // Generator output: one day, three exchanges.
      datagen::GeneratorConfig c;
      c.seed = seed;
      c.day = parse_date("2022-06-18");
      c.trades_rows = 10'000;
      c.book_rows = 10'000;
      d.trades = datagen::generate_trades(c);
      d.books = datagen::generate_multi_exchange_day(c, 3);
    } else {
      // Shuffled rows with ties and one-sided books, spread over eight days.
      fixtures::RandomOptions o;
      o.trades = 10'000;
      o.books = 10'000;
      o.symbols = {"BTC-USD", "ETH-USD", "USDT-USD"};
      d = fixtures::random_dataset(seed, TimeRange::days(parse_date("2022-06-17"), 8), o);
    }
    fixtures::TempDir dir;
    write_csv(dir / "trades.csv", d.trades);
    write_csv(dir / "books.csv", d.books);
    Engine engine(dir / "store", EngineOptions{{}, false});
    engine.ingest_csv(dir / "trades.csv");
    engine.ingest_csv(dir / "books.csv");

    for (const BenchmarkId id : read_benchmarks()) {
      const BenchmarkSpec spec = make_spec(id);
      analytics::RunOptions opts;
      Timestamp at = spec.range.begin;
      if (id == BenchmarkId::OT) opts.top_of_book_at = at = draw_random_at(spec);
      std::string got_error, want_error;
      ResultTable got, want;
      try {
        got = engine.execute(spec, opts).table;
      } catch (const Error& e) {
        got_error = e.what();
      }
      try {
        want = oracle::run(spec, d.trades, d.books, at);
      } catch (const std::exception& e) {
        want_error = e.what();
      }
      const std::string where = "seed " + std::to_string(seed) + " " + std::string(to_string(id));
      if (got_error.empty() != want_error.empty())
        return {false, where + ": error mismatch '" + got_error + "' vs '" + want_error + "'"};
      if (got_error.empty()) {
        const std::string diff = oracle::mismatch(got, want);
        if (!diff.empty()) return {false, where + ": " + diff};
      }
      ++compared;
    }
  }
  const double s = seconds_since(t0);
  std::ostringstream msg;
  msg << compared << " benchmark results on 10 datasets match the brute-force oracle in " << s << " s (limit 60 s)";
  return {s < 60.0, msg.str()};
}

Verdict equation_identities() {
  constexpr std::size_t kCases = 1000;
  const std::vector<std::pair<std::string, std::function<identities::Outcome()>>> checks = {
      {"telescoping", [] { return identities::telescoping(1001, kCases); }},
      {"scale invariance x7", [] { return identities::scale_invariance(1002, kCases, 7); }},
      {"vwap bounds", [] { return identities::vwap_bounds(1003, kCases); }},
      {"depth monotone", [] { return identities::depth_monotone(1004, kCases); }},
      {"nbbo dominance", [] { return identities::nbbo_dominance(1005, kCases); }},
  };
  std::string summary;
  for (const auto& [name, check] : checks) {
    const auto r = check();
    if (!r.ok() || r.cases < kCases)
      return {false, name + ": " + std::to_string(r.failures) + "/" + std::to_string(r.cases) +
                         " failed; " + r.first_failure};
    summary += (summary.empty() ? "" : ", ") + name + " " + std::to_string(r.cases);
  }
  return {true, summary + " cases hold"};
}

Verdict generator_fidelity() {
  const auto t0 = Clock::now();
  fixtures::TempDir dir;
  const auto first = tickbench_cli("generate --seed 1 --out " + q(dir / "a"));
  const auto second = tickbench_cli("generate --seed 1 --out " + q(dir / "b"));
  if (first.code != 0 || second.code != 0) return {false, "generate failed"};
  const auto a = json_lines(first.out), b = json_lines(second.out);
  if (a.size() != 2 || b.size() != 2) return {false, "unexpected generate output"};
  const std::uint64_t trades = a[0]["rows"], books = a[1]["rows"];
  if (trades != 1'000'000 || books != 1'500'000)
    return {false, "row counts " + std::to_string(trades) + " / " + std::to_string(books)};
  if (a[0]["sha256"] != b[0]["sha256"] || a[1]["sha256"] != b[1]["sha256"] ||
      !same_bytes(dir / "a/trades.csv", dir / "b/trades.csv") || !same_bytes(dir / "a/books.csv", dir / "b/books.csv"))
    return {false, "repeated seed produced different bytes"};

  // Every snapshot uncrossed, and the file in timestamp order.
  std::ifstream in(dir / "a/books.csv");
  std::string line;
  std::getline(in, line);
  std::uint64_t n = 0;
  Timestamp last{};
  while (std::getline(in, line)) {
    const auto parsed = csv::parse_book_row(line);
    const auto& book = parsed.book;
    if (parsed.violation) return {false, "book line " + std::to_string(n + 2) + ": " + *parsed.violation};
    if (check_snapshot(book)) return {false, "book line " + std::to_string(n + 2) + ": " + *check_snapshot(book)};
    if (!book.two_sided() || !(book.bids.front().price < book.asks.front().price))
      return {false, "crossed or one-sided snapshot at line " + std::to_string(n + 2)};
    if (book.timestamp < last) return {false, "books out of order at line " + std::to_string(n + 2)};
    last = book.timestamp;
    ++n;
  }
  if (n != books) return {false, "books.csv holds " + std::to_string(n) + " rows"};
  const double s = seconds_since(t0);
  std::ostringstream msg;
  msg << "1000000 trades, 1500000 uncrossed sorted books, identical on repeat, " << s << " s (limit 120 s)";
  return {s < 120.0, msg.str()};
}

Verdict round_trip() {
  fixtures::TempDir dir;
  if (tickbench_cli("generate --seed 2 --out " + q(dir / "data")).code != 0) return {false, "generate failed"};
  Engine engine(dir / "store", EngineOptions{});
  const auto t = engine.ingest_csv(dir / "data/trades.csv", TableKind::Trades);
  const auto b = engine.ingest_csv(dir / "data/books.csv", TableKind::Books);
  if (t.rejected || b.rejected) return {false, "ingest rejected rows"};
  engine.export_csv(TableKind::Trades, dir / "trades.out.csv");
  engine.export_csv(TableKind::Books, dir / "books.out.csv");
  const bool trades_same = same_bytes(dir / "data/trades.csv", dir / "trades.out.csv");
  const bool books_same = same_bytes(dir / "data/books.csv", dir / "books.out.csv");

  const auto st = engine.storage_report(TableKind::Trades, t.source_file_bytes);
  const auto sb = engine.storage_report(TableKind::Books, b.source_file_bytes);
  const auto all = make_storage_report(st.data_bytes_on_disk + sb.data_bytes_on_disk,
                                       t.source_file_bytes + b.source_file_bytes);
  const bool storage_ok = std::abs(all.efficiency_percent - 100.0) <= 2.0;
  std::ostringstream msg;
  msg.precision(4);
  msg << "export " << (trades_same && books_same ? "byte-identical" : "DIFFERS") << " for " << t.rows << " trades and "
      << b.rows << " books; uncompressed storage " << all.efficiency_percent << "% of CSV (trades "
      << st.efficiency_percent << "%, books " << sb.efficiency_percent << "%), expected 100% +/- 2%";
  return {trades_same && books_same && storage_ok, msg.str()};
}

Verdict protocol_fidelity() {
  fixtures::RandomOptions o;
  o.trades = 2000;
  o.books = 2000;
  fixtures::StubBackend stub("stub", fixtures::random_dataset(5, TimeRange::days(parse_date("2022-06-18"), 1), o), {});
  fixtures::TempDir dir;
  const fs::path counter = dir / "clears";

  harness::RunPlan plan;
  plan.specs = harness::select_specs({});
  plan.repetitions = 10;
  plan.cache_clear_command = "echo clear >> " + q(counter);
  const auto results = harness::run(plan, stub, stub);

  std::size_t clears = 0;
  {
    std::ifstream in(counter);
    for (std::string line; std::getline(in, line);) ++clears;
  }
  if (results.size() != 14) return {false, std::to_string(results.size()) + " results"};
  if (clears != 140) return {false, std::to_string(clears) + " cache clears for 14 benchmarks"};
  for (const auto& [id, n] : stub.executes_by_id)
    if (n != 10) return {false, std::string(to_string(id)) + " executed " + std::to_string(n) + " times"};
  if (stub.executes_by_id.size() != 14) return {false, "not every benchmark executed"};

  std::size_t k = 0;
  for (const auto& r : results) {
    if (r.error) return {false, std::string(to_string(r.id)) + ": " + *r.error};
    if (r.latencies_ms.size() != 10) return {false, std::string(to_string(r.id)) + ": latency count"};
    double sum = 0.0;
    for (const double v : r.latencies_ms) {
      const double recorded = static_cast<double>(stub.reported[k++].count()) / 1e6;
      if (v != recorded) return {false, std::string(to_string(r.id)) + ": latency differs from the recorded one"};
      sum += v;
    }
    if (r.mean_latency_ms != sum / 10.0) return {false, std::string(to_string(r.id)) + ": mean is not the mean"};
  }
  return {true, "14 benchmarks x 10 reps: 140 executes, 140 cache clears, means exact"};
}

Verdict consistency_gate() {
  fixtures::TempDir dir;
  const std::string config = "--config " + q(fs::path(TICKBENCH_SOURCE_DIR) / "config/faulted.ini");
  const std::string store = " --store " + q(dir / "store");
  if (tickbench_cli("generate --seed 3 --day 2022-06-18 --trades-rows 50000 --book-rows 50000 --out " +
                    q(dir / "data"))
              .code != 0 ||
      tickbench_cli("ingest --data " + q(dir / "data") + store).code != 0)
    return {false, "generate or ingest failed"};

  const auto same = tickbench_cli("verify --backend embedded " + config + store);
  const auto faulted = tickbench_cli("verify --backend faulted " + config + store);
  std::set<std::string> mismatched;
  for (const auto& j : json_lines(faulted.out))
    if (j["verdict"] != "equal") mismatched.insert(j["benchmark"].get<std::string>());
  const std::set<std::string> expected = {"C-VT", "C-VO1", "C-VO2"};
  std::string names;
  for (const auto& m : mismatched) names += (names.empty() ? "" : ",") + m;
  std::ostringstream msg;
  msg << "embedded vs embedded exit " << same.code << ", faulted exit " << faulted.code << " with mismatches {"
      << names << "}";
  return {same.code == 0 && faulted.code == 2 && mismatched == expected, msg.str()};
}

Verdict desk_run() {
  const auto t0 = Clock::now();
  fixtures::TempDir dir;
  const std::string store = " --store " + q(dir / "store");
  // Generator default day; the query ranges are anchored on it.
  if (tickbench_cli("generate --seed 4 --out " + q(dir / "data")).code != 0) return {false, "generate failed"};
  if (tickbench_cli("ingest --data " + q(dir / "data") + store).code != 0) return {false, "ingest failed"};
  const auto run = tickbench_cli("run --benchmarks all --reps 10 --day 2022-06-01 --out " + q(dir / "report.json") +
                                 store);
  const double s = seconds_since(t0);
  if (run.code != 0) return {false, "run exited " + std::to_string(run.code)};

  std::size_t consistent = 0;
  std::optional<double> w, se;
  for (const auto& j : json_lines(run.out)) {
    const std::string id = j["benchmark_id"];
    if (id == "W") w = j["throughput_mb_s"].get<double>();
    else if (id == "SE") se = j["efficiency_percent"].get<double>();
    else if (j["consistency"] == "equal" && j["error"].is_null()) ++consistent;
  }
  std::ostringstream msg;
  msg.precision(4);
  msg << consistent << "/14 consistent; W " << (w ? std::to_string(*w) : "missing") << " MB/s; SE "
      << (se ? std::to_string(*se) : "missing") << " %; " << s << " s (limit 900 s)";
  return {consistent == 14 && w && se && s < 900.0, msg.str()};
}

Verdict listing_parity() {
  // Two hours of BTC-USD books: three snapshots per five-minute bucket, the
  // last one of each bucket sets the close. ETH-USD rows must be ignored.
  const Timestamp day = fixtures::at("2022-06-18");
  std::vector<BookSnapshot> books;
  std::vector<double> closes;
  for (int bucket = 0; bucket < 24; ++bucket) {
    double close = 0.0;
    for (int j = 0; j < 3; ++j) {
      const double bid = 20'000.0 + 13.0 * ((bucket * 7 + j * 3) % 11) - 4.5 * (bucket % 5) + 0.25 * j;
      const double ask = bid + 0.5 + 0.25 * ((bucket + j) % 3);
      const Timestamp ts = day + bucket * 5 * kMinute + Duration{(j * 97 + 11) * 1'000'000'000LL};
      books.push_back(fixtures::make_book(ts, "EX1", "BTC-USD", {{bid, 1.0}}, {{ask, 2.0}}));
      books.push_back(fixtures::make_book(ts, "EX1", "ETH-USD", {{bid / 10, 1.0}}, {{ask / 10 + 7, 1.0}}));
      close = (bid + ask) / 2.0;
    }
    closes.push_back(close);
  }

  // Hand trace: lag log-differences, grouped by hour, sample stddev.
  std::vector<std::vector<double>> hourly(2);
  for (int i = 1; i < 24; ++i) hourly[static_cast<std::size_t>(i / 12)].push_back(std::log(closes[i]) - std::log(closes[i - 1]));
  std::vector<double> expected;
  for (const auto& r : hourly) {
    double mean = 0.0;
    for (const double v : r) mean += v;
    mean /= static_cast<double>(r.size());
    double ss = 0.0;
    for (const double v : r) ss += (v - mean) * (v - mean);
    expected.push_back(std::sqrt(ss / static_cast<double>(r.size() - 1)));
  }

  fixtures::TempDir dir;
  write_csv(dir / "books.csv", books);
  write_csv(dir / "trades.csv", std::vector<Trade>{});
  const auto cfg = backends::load_config(std::nullopt, dir / "store");
  auto backend = backends::make_backend(cfg.backend("embedded"));
  backend->connect();
  backend->ingest({dir / "trades.csv", dir / "books.csv"});
  const auto table = backends::normalize(backend->run(make_spec(BenchmarkId::CVO1)), BenchmarkId::CVO1);

  if (table.rows.size() != 2) return {false, std::to_string(table.rows.size()) + " hourly rows, expected 2"};
  std::ostringstream msg;
  msg.precision(17);
  for (std::size_t h = 0; h < 2; ++h) {
    const auto start = std::get<Timestamp>(table.rows[h][0]);
    const double got = std::get<double>(table.rows[h][1]);
    if (start != day + static_cast<std::int64_t>(h) * kHour) return {false, "window " + std::to_string(h) + " start"};
    if (std::abs(got - expected[h]) > 1e-9 * std::abs(expected[h])) {
      msg << "hour " << h << ": " << got << " vs trace " << expected[h];
      return {false, msg.str()};
    }
    msg << (h ? ", " : "hourly volatility ") << got;
  }
  msg << " equal the hand trace";
  return {true, msg.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"1 oracle equivalence", oracle_equivalence},
      {"2 equation identities", equation_identities},
      {"3 generator fidelity", generator_fidelity},
      {"4 round trip and storage", round_trip},
      {"5 protocol fidelity", protocol_fidelity},
      {"6 consistency gate", consistency_gate},
      {"7 end-to-end desk run", desk_run},
      {"8 C-VO1 hand trace", listing_parity},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failed;
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << name << ": " << v.detail << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
