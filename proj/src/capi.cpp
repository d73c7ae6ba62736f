#include "tickbench/tickbench.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include <nlohmann/json.hpp>

#include "tickbench/backends.hpp"
#include "tickbench/benchmarks.hpp"
#include "tickbench/csv.hpp"
#include "tickbench/datagen.hpp"
#include "tickbench/digest.hpp"
#include "tickbench/engine.hpp"
#include "tickbench/error.hpp"
#include "tickbench/harness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tickbench;

struct tb_engine {
  std::unique_ptr<Engine> engine;
};

struct tb_toolkit {
  backends::Config config;
  fs::path store_dir;
};

namespace {

thread_local std::string last_error;

tb_status set_error(tb_status status, const std::string& message) {
  last_error = message;
  return status;
}

template <class F>
tb_status guarded(F&& body) {
  last_error.clear();
  try {
    body();
    return TB_OK;
  } catch (const Error& e) {
    return set_error(static_cast<tb_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(TB_INTERNAL, "out of memory");
  } catch (const std::filesystem::filesystem_error& e) {
    return set_error(TB_IO, e.what());
  } catch (const std::exception& e) {
    return set_error(TB_INTERNAL, e.what());
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

void require(const void* p, const char* name) {
  if (!p) fail(Errc::invalid_argument, std::string(name) + " is null");
}

TableKind table_of(tb_table t) {
  if (t == TB_TABLE_TRADES) return TableKind::Trades;
  if (t == TB_TABLE_BOOKS) return TableKind::Books;
  fail(Errc::invalid_argument, "unknown table");
}

const BenchmarkInfo* catalogue_entry(size_t index) {
  const auto table = benchmark_table();
  return index < table.size() ? &table[index] : nullptr;
}

std::string json_line(const json& j) { return j.dump() + "\n"; }

harness::RunPlan make_plan(const tb_run_options& o) {
  harness::PlanFile file;
  if (o.plan_path) file = harness::read_plan_file(o.plan_path);
  harness::RunPlan& plan = file.plan;
  harness::PlanSelection& selection = file.selection;
  if (o.backend_id) plan.backend_id = o.backend_id;
  if (o.reference_id) plan.reference_id = o.reference_id;
  if (o.repetitions != 0) plan.repetitions = o.repetitions;
  if (o.cache_clear_command) plan.cache_clear_command = o.cache_clear_command;
  if (o.warm_up >= 0) plan.warm_up = o.warm_up != 0;
  if (o.benchmarks) selection.benchmarks = o.benchmarks;
  if (o.day) selection.catalog.anchor_day = parse_date(o.day);
  if (o.symbol) selection.catalog.symbol = o.symbol;
  if (o.hourly_tv2 >= 0) selection.catalog.hourly_tv2 = o.hourly_tv2 != 0;
  plan.specs = harness::select_specs(selection);
  harness::validate(plan);
  return plan;
}

std::unique_ptr<backends::Backend> open_backend(const tb_toolkit& t, const std::string& id) {
  auto b = backends::make_backend(t.config.backend(id));
  b->connect();
  return b;
}

}  // namespace

extern "C" {

const char* tb_status_name(tb_status status) {
  if (status == TB_OK) return "ok";
  const std::string_view name = errc_name(static_cast<Errc>(status));
  return name.data();
}

const char* tb_last_error(void) { return last_error.c_str(); }

void tb_free_string(char* s) { std::free(s); }

const char* tb_version(void) { return "0.1.0"; }

size_t tb_benchmark_count(void) { return benchmark_table().size(); }

const char* tb_benchmark_name(size_t index) {
  const auto* e = catalogue_entry(index);
  return e ? e->name.data() : nullptr;
}

const char* tb_benchmark_description(size_t index) {
  const auto* e = catalogue_entry(index);
  return e ? e->description.data() : nullptr;
}

const char* tb_benchmark_category(size_t index) {
  const auto* e = catalogue_entry(index);
  return e ? to_string(e->category).data() : nullptr;
}

int tb_benchmark_is_query(size_t index) {
  const auto* e = catalogue_entry(index);
  return e && is_read_benchmark(e->id) ? 1 : 0;
}

void tb_generate_options_init(tb_generate_options* options) {
  if (!options) return;
  const datagen::GeneratorConfig defaults;
  options->seed = defaults.seed;
  options->day = nullptr;
  options->trades_rows = defaults.trades_rows;
  options->book_rows = defaults.book_rows;
  options->exchanges = 1;
  options->out_dir = nullptr;
}

tb_status tb_generate(const tb_generate_options* options, char** out_json) {
  return guarded([&] {
    require(options, "options");
    require(options->out_dir, "out_dir");
    require(out_json, "out_json");
    datagen::GeneratorConfig config;
    config.seed = options->seed;
    if (options->day) config.day = parse_date(options->day);
    config.trades_rows = options->trades_rows;
    config.book_rows = options->book_rows;
    if (options->exchanges < 1) fail(Errc::invalid_argument, "exchanges must be at least 1");
    config.exchanges.clear();
    for (int i = 1; i <= options->exchanges; ++i) config.exchanges.push_back("EX" + std::to_string(i));
    datagen::validate(config);

    const fs::path dir = options->out_dir;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(Errc::io, dir.string() + ": " + ec.message());

    std::string out;
    auto describe = [&](TableKind kind, const fs::path& path, std::uint64_t rows, std::uint64_t bytes) {
      out += json_line({{"table", std::string(to_string(kind))},
                        {"path", path.string()},
                        {"rows", rows},
                        {"bytes", bytes},
                        {"sha256", sha256_file(path)}});
    };

    const fs::path trades_path = dir / "trades.csv";
    {
      csv::Writer w(trades_path, TableKind::Trades);
      datagen::TradeStream stream(config);
      Trade t;
      while (stream.next(t)) w.write(t);
      const auto rows = w.rows();
      describe(TableKind::Trades, trades_path, rows, w.close());
    }
    const fs::path books_path = dir / "books.csv";
    {
      csv::Writer w(books_path, TableKind::Books);
      BookSnapshot b;
      if (options->exchanges > 1) {
        datagen::MultiExchangeBookStream stream(config, options->exchanges);
        while (stream.next(b)) w.write(b);
      } else {
        datagen::BookStream stream(config);
        while (stream.next(b)) w.write(b);
      }
      const auto rows = w.rows();
      describe(TableKind::Books, books_path, rows, w.close());
    }
    *out_json = copy_string(out);
  });
}

tb_status tb_engine_open(const char* root, const char* compression, tb_engine** out) {
  return guarded([&] {
    require(root, "root");
    require(out, "out");
    EngineOptions options;
    if (compression) options.compression = CompressionPolicy::parse(compression);
    auto handle = std::make_unique<tb_engine>();
    handle->engine = std::make_unique<Engine>(root, options);
    *out = handle.release();
  });
}

void tb_engine_close(tb_engine* engine) { delete engine; }

tb_status tb_engine_ingest_csv(tb_engine* engine, const char* path, char** out_json) {
  return guarded([&] {
    require(engine, "engine");
    require(path, "path");
    require(out_json, "out_json");
    const IngestReport r = engine->engine->ingest_csv(path);
    json parts = json::array();
    for (const Date d : r.partitions) parts.push_back(format_date(d));
    *out_json = copy_string(json_line({{"table", std::string(to_string(r.table))},
                                       {"rows", r.rows},
                                       {"rejected", r.rejected},
                                       {"reject_samples", r.reject_samples},
                                       {"partitions", parts},
                                       {"source_file_bytes", r.source_file_bytes},
                                       {"elapsed_ms", static_cast<double>(r.elapsed.count()) / 1e6}}));
  });
}

tb_status tb_engine_export_csv(tb_engine* engine, tb_table table, const char* path, uint64_t* out_rows) {
  return guarded([&] {
    require(engine, "engine");
    require(path, "path");
    const auto rows = engine->engine->export_csv(table_of(table), path);
    if (out_rows) *out_rows = rows;
  });
}

tb_status tb_engine_row_count(tb_engine* engine, tb_table table, uint64_t* out_rows) {
  return guarded([&] {
    require(engine, "engine");
    require(out_rows, "out_rows");
    *out_rows = engine->engine->row_count(table_of(table));
  });
}

tb_status tb_engine_storage_report(tb_engine* engine, tb_table table, uint64_t source_file_bytes, double* out_percent) {
  return guarded([&] {
    require(engine, "engine");
    require(out_percent, "out_percent");
    *out_percent = engine->engine->storage_report(table_of(table), source_file_bytes).efficiency_percent;
  });
}

tb_status tb_engine_execute(tb_engine* engine, const char* benchmark, const char* day, char** out_tsv) {
  return guarded([&] {
    require(engine, "engine");
    require(benchmark, "benchmark");
    require(out_tsv, "out_tsv");
    CatalogOptions catalog;
    if (day) catalog.anchor_day = parse_date(day);
    const BenchmarkSpec spec = make_spec(parse_benchmark_id(benchmark), catalog);
    if (!is_read_benchmark(spec.id)) fail(Errc::invalid_argument, std::string(benchmark) + " is not a query benchmark");
    *out_tsv = copy_string(canonical_text(engine->engine->execute(spec).table));
  });
}

tb_status tb_toolkit_open(const char* config_path, const char* store_dir, tb_toolkit** out) {
  return guarded([&] {
    require(store_dir, "store_dir");
    require(out, "out");
    auto t = std::make_unique<tb_toolkit>();
    t->store_dir = store_dir;
    const auto path = backends::resolve_config_path(config_path ? std::optional<std::string>(config_path) : std::nullopt);
    t->config = backends::load_config(path, t->store_dir);
    *out = t.release();
  });
}

void tb_toolkit_close(tb_toolkit* toolkit) { delete toolkit; }

tb_status tb_toolkit_backends(tb_toolkit* toolkit, char** out_ids) {
  return guarded([&] {
    require(toolkit, "toolkit");
    require(out_ids, "out_ids");
    std::string ids;
    for (const auto& [id, d] : toolkit->config.backends) ids += (ids.empty() ? "" : ",") + id;
    *out_ids = copy_string(ids);
  });
}

tb_status tb_ingest(tb_toolkit* toolkit, const char* backend_id, const char* data_dir, char** out_json) {
  return guarded([&] {
    require(toolkit, "toolkit");
    require(data_dir, "data_dir");
    require(out_json, "out_json");
    const std::string id = backend_id ? backend_id : "embedded";
    const fs::path dir = data_dir;
    const std::vector<fs::path> files = {dir / "trades.csv", dir / "books.csv"};
    for (const auto& f : files)
      if (!fs::is_regular_file(f)) fail(Errc::not_found, f.string() + ": no such file");
    auto backend = open_backend(*toolkit, id);
    const harness::IngestResult w = harness::run_ingest_benchmark(*backend, files);
    std::string out = json_line({{"benchmark", "W"},
                                 {"backend_id", w.backend},
                                 {"elapsed_ms", w.elapsed_ms},
                                 {"rows", w.rows},
                                 {"source_file_bytes", w.source_file_bytes},
                                 {"throughput_mb_s", w.throughput_mb_s}});
    const harness::StorageOutcome s = harness::run_storage_benchmark(*backend, w.source_file_bytes);
    if (s.supported)
      out += json_line({{"benchmark", "SE"},
                        {"backend_id", s.backend},
                        {"data_bytes_on_disk", s.report.data_bytes_on_disk},
                        {"source_file_bytes", s.report.source_file_bytes},
                        {"efficiency_percent", s.report.efficiency_percent}});
    else
      out += json_line({{"benchmark", "SE"}, {"backend_id", s.backend}, {"efficiency_percent", "unsupported"}});
    backend->close();
    *out_json = copy_string(out);
  });
}

void tb_run_options_init(tb_run_options* options) {
  if (!options) return;
  *options = tb_run_options{};
  options->repetitions = 0;
  options->warm_up = -1;
  options->hourly_tv2 = -1;
}

tb_status tb_run(tb_toolkit* toolkit, const tb_run_options* options, char** out_json, int* out_exit_code) {
  return guarded([&] {
    require(toolkit, "toolkit");
    require(options, "options");
    require(out_json, "out_json");
    require(out_exit_code, "out_exit_code");
    const harness::RunPlan plan = make_plan(*options);
    // Resolve both ids before touching either backend.
    toolkit->config.backend(plan.backend_id);
    toolkit->config.backend(plan.reference_id);

    harness::Report report;
    {
      auto target = open_backend(*toolkit, plan.backend_id);
      if (plan.reference_id == plan.backend_id) {
        report.results = harness::run(plan, *target, *target);
      } else {
        auto reference = open_backend(*toolkit, plan.reference_id);
        report.results = harness::run(plan, *target, *reference);
      }
      if (const auto w = target->recorded_ingest(); w && w->elapsed.count() > 0) {
        harness::IngestResult ir;
        ir.backend = target->descriptor().id;
        ir.elapsed_ms = static_cast<double>(w->elapsed.count()) / 1e6;
        ir.rows = w->rows;
        ir.source_file_bytes = w->source_file_bytes;
        ir.throughput_mb_s = harness::throughput_mb_s(w->source_file_bytes, ir.elapsed_ms);
        report.ingest = ir;
        if (w->source_file_bytes > 0) report.storage = harness::run_storage_benchmark(*target, w->source_file_bytes);
      }
      target->close();
    }
    if (options->out_path) harness::emit_report(report, harness::ReportFormat::Json, options->out_path);
    *out_json = copy_string(harness::to_json_lines(report));
    *out_exit_code = harness::exit_code(report.results);
  });
}

tb_status tb_verify(tb_toolkit* toolkit, const tb_run_options* options, char** out_json, int* out_exit_code) {
  return guarded([&] {
    require(toolkit, "toolkit");
    require(options, "options");
    require(out_json, "out_json");
    require(out_exit_code, "out_exit_code");
    harness::RunPlan plan = make_plan(*options);
    plan.repetitions = 1;
    plan.warm_up = false;
    toolkit->config.backend(plan.backend_id);
    toolkit->config.backend(plan.reference_id);
    // Separate instances even for the same id, so the comparison is real.
    auto target = open_backend(*toolkit, plan.backend_id);
    auto reference = open_backend(*toolkit, plan.reference_id);
    const auto results = harness::run(plan, *target, *reference);
    std::string out;
    for (const auto& r : results) {
      json j = {{"benchmark", std::string(to_string(r.id))},
                {"backend_id", r.backend},
                {"against", plan.reference_id},
                {"verdict", r.error ? "error" : std::string(to_string(r.consistency))},
                {"rows", r.rows},
                {"result_digest", r.result_digest}};
      if (!r.detail.empty()) j["detail"] = r.detail;
      if (r.error) j["error"] = *r.error;
      out += json_line(j);
    }
    *out_json = copy_string(out);
    *out_exit_code = harness::exit_code(results);
  });
}

tb_status tb_report(const char* in_path, const char* format, const char* out_path, char** out_json) {
  return guarded([&] {
    require(in_path, "in_path");
    require(format, "format");
    require(out_path, "out_path");
    require(out_json, "out_json");
    const harness::Report report = harness::read_report(in_path);
    if (report.results.empty()) fail(Errc::invalid_data, std::string(in_path) + ": report has no results");
    const auto files = harness::emit_report(report, harness::parse_report_format(format), out_path);
    json list = json::array();
    for (const auto& f : files) list.push_back(f.string());
    *out_json = copy_string(json_line({{"format", format}, {"results", report.results.size()}, {"files", list}}));
  });
}

}  // extern "C"
