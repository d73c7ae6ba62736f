#include <gtest/gtest.h>

#include <sstream>

#include "fixtures.hpp"
#include "stub_backend.hpp"
#include "tickbench/error.hpp"
#include "tickbench/harness.hpp"

using namespace tickbench;
using namespace tickbench::harness;
using fixtures::StubBackend;

namespace {

fixtures::Dataset small_day() {
  fixtures::RandomOptions o;
  o.trades = 500;
  o.books = 500;
  return fixtures::random_dataset(77, TimeRange::days(parse_date("2022-06-18"), 1), o);
}

RunPlan plan_for(const std::string& ids, int reps, std::string cache_clear = "none") {
  PlanSelection s;
  s.benchmarks = ids;
  RunPlan p;
  p.specs = select_specs(s);
  p.repetitions = reps;
  p.cache_clear_command = std::move(cache_clear);
  return p;
}

std::size_t line_count(const std::filesystem::path& p) {
  if (!std::filesystem::exists(p)) return 0;
  const std::string s = fixtures::read_file(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::internal;
}

}  // namespace

TEST(Harness, RepetitionsExecutesAndCacheClearsAreCounted) {
  fixtures::TempDir dir;
  const auto counter = dir / "clears";
  StubBackend stub("stub", small_day(), {});
  const auto plan = plan_for("T-V1,O-S,C-VO1", 10, "echo x >> '" + counter.string() + "'");
  const auto results = run(plan, stub, stub);
  ASSERT_EQ(results.size(), 3u);
  EXPECT_EQ(stub.executes, 30u);
  for (const auto& [id, n] : stub.executes_by_id) EXPECT_EQ(n, 10u) << to_string(id);
  EXPECT_EQ(line_count(counter), 30u);
  for (const auto& r : results) {
    EXPECT_FALSE(r.error);
    EXPECT_EQ(r.consistency, Consistency::Equal);
    EXPECT_EQ(r.latencies_ms.size(), 10u);
    EXPECT_EQ(r.latency_source, LatencySource::ServerReported);
  }
}

TEST(Harness, MeanIsTheArithmeticMeanOfRecordedServerLatencies) {
  StubBackend stub("stub", small_day(), {});
  const auto results = run(plan_for("C-R", 10), stub, stub);
  ASSERT_EQ(stub.reported.size(), 10u);
  double sum = 0;
  for (std::size_t i = 0; i < 10; ++i) {
    const double ms = static_cast<double>(stub.reported[i].count()) / 1e6;
    EXPECT_EQ(results[0].latencies_ms[i], ms);
    sum += ms;
  }
  EXPECT_EQ(results[0].mean_latency_ms, sum / 10);
  EXPECT_EQ(arithmetic_mean({1.0, 2.0, 4.0}), 7.0 / 3);
  EXPECT_EQ(arithmetic_mean({}), 0.0);
}

TEST(Harness, NoneMeansNoCacheClearAndWarmUpIsUncounted) {
  StubBackend stub("stub", small_day(), {});
  auto plan = plan_for("O-B1", 4, "none");
  plan.warm_up = true;
  const auto results = run(plan, stub, stub);
  EXPECT_EQ(stub.executes, 5u);
  EXPECT_EQ(results[0].latencies_ms.size(), 4u);
}

TEST(Harness, FailingCacheClearIsAnOperationalError) {
  StubBackend stub("stub", small_day(), {});
  const auto results = run(plan_for("O-B1,O-S", 3, "exit 3"), stub, stub);
  ASSERT_EQ(results.size(), 2u);
  for (const auto& r : results) ASSERT_TRUE(r.error);
  EXPECT_EQ(stub.executes, 0u);
  EXPECT_EQ(exit_code(results), 1);
}

TEST(Harness, WallClockWhenTheBackendDoesNotReport) {
  StubBackend::Options o;
  o.server_latency = false;
  StubBackend stub("stub", small_day(), o);
  const auto r = run(plan_for("O-B1", 3), stub, stub)[0];
  EXPECT_EQ(r.latency_source, LatencySource::HarnessWallClock);
  for (const double v : r.latencies_ms) EXPECT_GT(v, 0.0);
  EXPECT_FALSE(r.query_storage_supported);
  EXPECT_FALSE(r.query_storage_bytes);
}

TEST(Harness, QueryStorageIsTheLargestRepetition) {
  StubBackend::Options o;
  o.query_storage = true;
  StubBackend stub("stub", small_day(), o);
  const auto r = run(plan_for("O-S", 4), stub, stub)[0];
  EXPECT_TRUE(r.query_storage_supported);
  EXPECT_EQ(r.query_storage_bytes, 4000u);
}

TEST(Harness, ConsistencyAgainstASeparateReference) {
  const auto data = small_day();
  StubBackend reference("ref", data, {});
  StubBackend same("same", data, {});
  auto results = run(plan_for("C-VT,O-S", 2), same, reference);
  EXPECT_EQ(exit_code(results), 0);
  EXPECT_EQ(reference.executes, 2u);

  StubBackend::Options off;
  off.perturb = 1.001;
  StubBackend skewed("skewed", data, off);
  results = run(plan_for("C-VT,T-V1", 2), skewed, reference);
  // Catalogue order puts T-V1 first.
  EXPECT_EQ(results[0].consistency, Consistency::Equal);
  EXPECT_EQ(results[1].consistency, Consistency::Mismatch);
  EXPECT_FALSE(results[1].detail.empty());
  EXPECT_EQ(exit_code(results), 2);

  StubBackend::Options flaky;
  flaky.unstable = true;
  StubBackend wobbly("wobbly", data, flaky);
  results = run(plan_for("C-VT", 3), wobbly, wobbly);
  EXPECT_EQ(results[0].consistency, Consistency::Unstable);
  EXPECT_FALSE(results[0].digests_stable);
  EXPECT_EQ(exit_code(results), 2);

  StubBackend::Options broken;
  broken.fail_on = BenchmarkId::OS;
  StubBackend refusing("refusing", data, broken);
  results = run(plan_for("O-B1,O-S", 2), refusing, reference);
  EXPECT_FALSE(results[0].error);
  ASSERT_TRUE(results[1].error);
  EXPECT_NE(results[1].error->find("refused"), std::string::npos);
  EXPECT_EQ(exit_code(results), 1);
}

TEST(Harness, PlanValidationAndSelection) {
  EXPECT_EQ(code_of([] { validate(plan_for("O-B1", 0)); }), Errc::invalid_argument);
  RunPlan empty;
  EXPECT_EQ(code_of([&] { validate(empty); }), Errc::invalid_argument);
  EXPECT_EQ(select_specs({}).size(), 14u);
  PlanSelection s;
  s.benchmarks = "C-VO2, T-V1";
  const auto specs = select_specs(s);
  ASSERT_EQ(specs.size(), 2u);
  EXPECT_EQ(specs[0].id, BenchmarkId::TV1);
  s.benchmarks = "T-V1,W";
  EXPECT_EQ(code_of([&] { select_specs(s); }), Errc::invalid_argument);
  s.benchmarks = "T-V9";
  try {
    select_specs(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("O-NBBO"), std::string::npos);
  }
}

TEST(Harness, PlanFile) {
  fixtures::TempDir dir;
  fixtures::write_file(dir / "p.ini",
                       "[plan]\nbackend = ch\nbenchmarks = O-S, C-R\nrepetitions = 3\n"
                       "cache_clear_command = sync\nwarm_up = true\nday = 2022-06-01\nsymbol = ETH-USD\n");
  const auto f = read_plan_file(dir / "p.ini");
  EXPECT_EQ(f.plan.backend_id, "ch");
  EXPECT_EQ(f.plan.reference_id, "embedded");
  EXPECT_EQ(f.plan.repetitions, 3);
  EXPECT_TRUE(f.plan.warm_up);
  EXPECT_EQ(f.plan.cache_clear_command, "sync");
  ASSERT_EQ(f.plan.specs.size(), 2u);
  EXPECT_EQ(f.plan.specs[0].range, TimeRange::days(parse_date("2022-06-01"), 1));
  EXPECT_EQ(f.plan.specs[1].symbol, "ETH-USD");
  EXPECT_EQ(f.selection.benchmarks, "O-S, C-R");

  fixtures::write_file(dir / "bad.ini", "[plan]\nrepetition = 3\n");
  EXPECT_EQ(code_of([&] { load_plan(dir / "bad.ini"); }), Errc::config);
  fixtures::write_file(dir / "zero.ini", "[plan]\nrepetitions = 0\n");
  EXPECT_EQ(code_of([&] { load_plan(dir / "zero.ini"); }), Errc::config);
  fixtures::write_file(dir / "none.ini", "[other]\nx = 1\n");
  EXPECT_EQ(code_of([&] { load_plan(dir / "none.ini"); }), Errc::config);
  fixtures::write_file(dir / "defaults.ini", "[plan]\nwarm_up = false\n");
  EXPECT_EQ(load_plan(dir / "defaults.ini").repetitions, 10);
}

TEST(Harness, IngestBenchmarkRules) {
  fixtures::TempDir dir;
  fixtures::write_file(dir / "t.csv", std::string(2'000'000, 'x'));
  StubBackend stub("stub", {}, {});
  EXPECT_EQ(code_of([&] { run_ingest_benchmark(stub, {dir / "missing.csv"}); }), Errc::not_found);
  const auto r = run_ingest_benchmark(stub, {dir / "t.csv"});
  EXPECT_EQ(r.source_file_bytes, 2'000'000u);
  EXPECT_EQ(r.backend, "stub");
  EXPECT_DOUBLE_EQ(r.throughput_mb_s, throughput_mb_s(2'000'000, r.elapsed_ms));
  EXPECT_EQ(code_of([&] { run_ingest_benchmark(stub, {dir / "t.csv"}); }), Errc::already_exists);
  EXPECT_DOUBLE_EQ(throughput_mb_s(50'000'000, 500.0), 100.0);
  EXPECT_EQ(code_of([] { throughput_mb_s(1, 0.0); }), Errc::invalid_argument);
}

TEST(Harness, StorageBenchmarkReportsUnsupported) {
  StubBackend stub("stub", {}, {});
  const auto s = run_storage_benchmark(stub, 1000);
  EXPECT_FALSE(s.supported);
  EXPECT_EQ(s.backend, "stub");
}

namespace {

Report sample_report() {
  Report rep;
  for (const char* backend : {"embedded", "ch"}) {
    for (const BenchmarkId id : {BenchmarkId::CVO1, BenchmarkId::TV1, BenchmarkId::OS}) {
      BenchmarkResult r;
      r.id = id;
      r.backend = backend;
      r.latencies_ms = {1.25, 2.5, 0.1 + 0.2};
      r.mean_latency_ms = arithmetic_mean(r.latencies_ms);
      r.latency_source = LatencySource::ServerReported;
      r.query_storage_supported = std::string(backend) == "embedded";
      if (r.query_storage_supported) r.query_storage_bytes = 123456789;
      r.result_digest = std::string(64, 'a');
      r.rows = 1440;
      r.consistency = Consistency::Equal;
      rep.results.push_back(r);
    }
  }
  rep.results[3].error = "ch: connection refused";
  rep.results[3].consistency = Consistency::NotChecked;
  rep.results[1].consistency = Consistency::Mismatch;
  rep.results[1].detail = "row 3 column 1: 0.1 vs 0.2";
  rep.ingest = IngestResult{"embedded", 1234.5, 2'500'000, 600'000'000, throughput_mb_s(600'000'000, 1234.5)};
  rep.storage = StorageOutcome{"embedded", true, make_storage_report(502'380'000, 600'000'000)};
  return rep;
}

}  // namespace

TEST(Report, JsonRoundTripIsExact) {
  const Report rep = sample_report();
  EXPECT_EQ(report_from_json(to_json(rep)), rep);
  Report unsupported;
  unsupported.storage = StorageOutcome{"influx", false, {}};
  EXPECT_EQ(report_from_json(to_json(unsupported)), unsupported);
  EXPECT_NE(to_json(unsupported).find("\"unsupported\""), std::string::npos);
  EXPECT_EQ(code_of([] { report_from_json("{\"results\": [}"); }), Errc::invalid_data);
  EXPECT_EQ(code_of([] { report_from_json("{\"results\": [{\"benchmark_id\": \"X\"}]}"); }), Errc::invalid_data);
}

TEST(Report, JsonLinesOnePerResultThenWAndSE) {
  const std::string lines = to_json_lines(sample_report());
  std::istringstream in(lines);
  std::string line;
  std::vector<std::string> all;
  while (std::getline(in, line)) all.push_back(line);
  ASSERT_EQ(all.size(), 8u);
  EXPECT_NE(all[6].find("throughput_mb_s"), std::string::npos);
  EXPECT_NE(all[7].find("efficiency_percent"), std::string::npos);
}

TEST(Report, CsvGroupsByCategory) {
  const std::string csv = to_csv(sample_report());
  std::istringstream in(csv);
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(in, line)) rows.push_back(line);
  ASSERT_EQ(rows.size(), 7u);
  EXPECT_EQ(rows[0], "benchmark,category,backend,repetitions,mean_latency_ms,latency_source,query_storage_bytes,consistency");
  EXPECT_EQ(rows[1].rfind("T-V1,Trades,embedded,3,", 0), 0u) << rows[1];
  EXPECT_EQ(rows[2].rfind("T-V1,Trades,ch,3,", 0), 0u);
  EXPECT_EQ(rows[3].rfind("O-S,OrderBook,embedded", 0), 0u);
  EXPECT_EQ(rows[6], "C-VO1,ComplexQuery,ch,3,,server_reported,unsupported,error");
  EXPECT_NE(rows[1].find(",123456789,"), std::string::npos);
}

TEST(Report, PlotdataFilesPerCategory) {
  fixtures::TempDir dir;
  const auto files = emit_report(sample_report(), ReportFormat::Plotdata, dir / "plots");
  EXPECT_EQ(files.size(), 5u);
  const std::string storage = fixtures::read_file(dir / "plots/storageefficiency.dat");
  EXPECT_NE(storage.find("embedded 83.7"), std::string::npos) << storage;
  EXPECT_NE(storage.find(" 502380000 600000000\n"), std::string::npos) << storage;
  const std::string complex = fixtures::read_file(dir / "plots/complexquery.dat");
  EXPECT_EQ(std::count(complex.begin(), complex.end(), '\n'), 2);
  EXPECT_EQ(parse_report_format("csv"), ReportFormat::Csv);
  EXPECT_EQ(code_of([] { parse_report_format("xml"); }), Errc::invalid_argument);

  emit_report(sample_report(), ReportFormat::Json, dir / "r.json");
  EXPECT_EQ(read_report(dir / "r.json"), sample_report());
}
