// tickbench command line. Machine output is JSON lines on stdout; messages
// go to stderr. Exit codes: 0 ok, 1 error, 2 consistency failure.

#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "tickbench/tickbench.h"

namespace {

const char* opt(const std::optional<std::string>& s) { return s ? s->c_str() : nullptr; }

int report_error(tb_status status) {
  std::fprintf(stderr, "tickbench: %s: %s\n", tb_status_name(status), tb_last_error());
  return 1;
}

void print_owned(char* text) {
  if (!text) return;
  std::fputs(text, stdout);
  std::fflush(stdout);
  tb_free_string(text);
}

std::string catalogue_text() {
  std::string out = "Benchmarks:\n";
  for (size_t i = 0; i < tb_benchmark_count(); ++i) {
    std::string name = tb_benchmark_name(i);
    name.resize(8, ' ');
    out += "  " + name + tb_benchmark_description(i);
    if (!tb_benchmark_is_query(i)) out += " (reported by ingest and run)";
    out += "\n";
  }
  out += "\nEnvironment: TICKBENCH_CONFIG (backend config), TICKBENCH_STORE (embedded store),\n"
         "TICKBENCH_ASSETS (query asset root).\n";
  return out;
}

struct Common {
  std::optional<std::string> config;
  std::string store;
};

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("--config", common.config, "Backend config file (INI)");
  cmd->add_option("--store", common.store, "Embedded store directory")->capture_default_str();
}

struct RunFlags {
  std::optional<std::string> plan, backend, against, benchmarks, cache_clear, day, symbol, out;
  std::optional<int> reps;
  bool warm_up = false;
  bool hourly_tv2 = false;
};

tb_run_options to_options(const RunFlags& f) {
  tb_run_options o;
  tb_run_options_init(&o);
  o.plan_path = opt(f.plan);
  o.backend_id = opt(f.backend);
  o.reference_id = opt(f.against);
  o.benchmarks = opt(f.benchmarks);
  o.cache_clear_command = opt(f.cache_clear);
  o.day = opt(f.day);
  o.symbol = opt(f.symbol);
  o.out_path = opt(f.out);
  if (f.reps) o.repetitions = *f.reps;
  if (f.warm_up) o.warm_up = 1;
  if (f.hourly_tv2) o.hourly_tv2 = 1;
  return o;
}

tb_toolkit* open_toolkit(const Common& common, int& rc) {
  tb_toolkit* toolkit = nullptr;
  const tb_status s = tb_toolkit_open(opt(common.config), common.store.c_str(), &toolkit);
  if (s != TB_OK) {
    rc = report_error(s);
    return nullptr;
  }
  return toolkit;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-series database benchmarks for tick data"};
  app.require_subcommand(1);
  app.footer(catalogue_text());
  app.set_version_flag("--version", std::string(tb_version()));

  Common common;
  const char* env_store = std::getenv("TICKBENCH_STORE");
  common.store = env_store && *env_store ? env_store : "tickbench-store";

  // generate
  tb_generate_options gen;
  tb_generate_options_init(&gen);
  std::string gen_day = "2022-06-01";
  std::string gen_out;
  auto* generate = app.add_subcommand("generate", "Write one day of synthetic trades.csv and books.csv");
  generate->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
  generate->add_option("--day", gen_day, "UTC day YYYY-MM-DD")->capture_default_str();
  generate->add_option("--trades-rows", gen.trades_rows, "Trade rows")->capture_default_str();
  generate->add_option("--book-rows", gen.book_rows, "Order book snapshot rows")->capture_default_str();
  generate->add_option("--exchanges", gen.exchanges, "Exchanges in the book data")->capture_default_str()->check(
      CLI::PositiveNumber);
  generate->add_option("--out", gen_out, "Output directory")->required();

  // ingest
  std::string ingest_backend = "embedded";
  std::string ingest_data;
  auto* ingest = app.add_subcommand("ingest", "Load trades.csv and books.csv into a backend (W, then SE)");
  ingest->add_option("--backend", ingest_backend, "Backend id")->capture_default_str();
  ingest->add_option("--data", ingest_data, "Directory holding trades.csv and books.csv")->required();
  add_common(ingest, common);

  // run
  RunFlags run_flags;
  auto* run = app.add_subcommand("run", "Run query benchmarks with repetitions and cache clearing");
  run->add_option("--plan", run_flags.plan, "Plan file (INI, [plan] section); flags override it");
  run->add_option("--backend", run_flags.backend, "Backend id (default embedded)");
  run->add_option("--against", run_flags.against, "Reference backend id (default embedded)");
  run->add_option("--benchmarks", run_flags.benchmarks, "Comma separated ids or all (default all)");
  run->add_option("--reps", run_flags.reps, "Repetitions per benchmark (default 10)")->check(CLI::PositiveNumber);
  run->add_option("--cache-clear-cmd", run_flags.cache_clear, "Command run before every execution, or none");
  run->add_flag("--warm-up", run_flags.warm_up, "One unmeasured execution first");
  run->add_option("--day", run_flags.day, "First day of the query ranges (default 2022-06-18)");
  run->add_option("--symbol", run_flags.symbol, "Symbol filter (default BTC-USD)");
  run->add_flag("--hourly-tv2", run_flags.hourly_tv2, "T-V2 with hourly instead of daily buckets");
  run->add_option("--out", run_flags.out, "JSON report path");
  add_common(run, common);

  // verify
  RunFlags verify_flags;
  auto* verify = app.add_subcommand("verify", "Run each query once on two backends and compare results");
  verify->add_option("--backend", verify_flags.backend, "Backend id")->required();
  verify->add_option("--against", verify_flags.against, "Reference backend id (default embedded)");
  verify->add_option("--benchmarks", verify_flags.benchmarks, "Comma separated ids or all (default all)");
  verify->add_option("--day", verify_flags.day, "First day of the query ranges (default 2022-06-18)");
  verify->add_option("--symbol", verify_flags.symbol, "Symbol filter (default BTC-USD)");
  verify->add_flag("--hourly-tv2", verify_flags.hourly_tv2, "T-V2 with hourly instead of daily buckets");
  add_common(verify, common);

  // report
  std::string report_in, report_format = "csv", report_out;
  auto* report = app.add_subcommand("report", "Convert a JSON report to csv or plotdata");
  report->add_option("--in", report_in, "JSON report from run")->required();
  report->add_option("--format", report_format, "csv, plotdata or json")
      ->capture_default_str()
      ->check(CLI::IsMember({"csv", "plotdata", "json"}));
  report->add_option("--out", report_out, "Output file (directory for plotdata)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "tickbench: %s\n", e.what());
    std::fprintf(stderr, "Run with --help for usage.\n");
    return 1;
  }

  char* text = nullptr;
  int rc = 0;

  if (*generate) {
    gen.day = gen_day.c_str();
    gen.out_dir = gen_out.c_str();
    const tb_status s = tb_generate(&gen, &text);
    if (s != TB_OK) return report_error(s);
    print_owned(text);
    return 0;
  }

  if (*report) {
    const tb_status s = tb_report(report_in.c_str(), report_format.c_str(), report_out.c_str(), &text);
    if (s != TB_OK) return report_error(s);
    print_owned(text);
    return 0;
  }

  tb_toolkit* toolkit = open_toolkit(common, rc);
  if (!toolkit) return rc;

  if (*ingest) {
    const tb_status s = tb_ingest(toolkit, ingest_backend.c_str(), ingest_data.c_str(), &text);
    rc = s == TB_OK ? 0 : report_error(s);
  } else if (*run) {
    const tb_run_options o = to_options(run_flags);
    const tb_status s = tb_run(toolkit, &o, &text, &rc);
    if (s != TB_OK) rc = report_error(s);
    if (rc == 2) std::fprintf(stderr, "tickbench: some results are inconsistent with the reference\n");
    if (rc == 1 && s == TB_OK) std::fprintf(stderr, "tickbench: some benchmarks failed; see the error fields\n");
  } else if (*verify) {
    const tb_run_options o = to_options(verify_flags);
    const tb_status s = tb_verify(toolkit, &o, &text, &rc);
    if (s != TB_OK) rc = report_error(s);
  }
  print_owned(text);
  tb_toolkit_close(toolkit);
  return rc;
}
