#include "tickbench/harness.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>

#include "tickbench/digest.hpp"
#include "tickbench/error.hpp"

namespace tickbench::harness {

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double to_ms(Duration d) { return static_cast<double>(d.count()) / 1e6; }

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  fail(Errc::config, key + ": expected true or false, got '" + v + "'");
}

bool is_none(std::string_view cmd) { return cmd.empty() || cmd == "none"; }

// Runs the command with its stdout sent to stderr so machine output on
// stdout stays clean.
void clear_cache(const std::string& command) {
  std::fflush(stdout);
  const std::string wrapped = "{ " + command + "\n} 1>&2";
  const int status = std::system(wrapped.c_str());
  if (status == -1) fail(Errc::io, "cache clear command could not be started: " + command);
  if (!WIFEXITED(status)) fail(Errc::io, "cache clear command terminated abnormally: " + command);
  if (WEXITSTATUS(status) != 0)
    fail(Errc::io, "cache clear command exited with status " + std::to_string(WEXITSTATUS(status)) + ": " + command);
}

std::size_t catalogue_index(BenchmarkId id) {
  const auto table = benchmark_table();
  for (std::size_t i = 0; i < table.size(); ++i)
    if (table[i].id == id) return i;
  return table.size();
}

std::string category_file(Category c) {
  std::string s(to_string(c));
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return s + ".dat";
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io, path.string() + ": cannot open for writing");
  out << text;
  out.close();
  if (!out) fail(Errc::io, path.string() + ": write failed");
}

}  // namespace

std::string_view to_string(LatencySource source) {
  return source == LatencySource::ServerReported ? "server_reported" : "harness_wall_clock";
}

LatencySource parse_latency_source(std::string_view text) {
  if (text == "server_reported") return LatencySource::ServerReported;
  if (text == "harness_wall_clock") return LatencySource::HarnessWallClock;
  fail(Errc::invalid_data, "unknown latency source '" + std::string(text) + "'");
}

std::string_view to_string(Consistency c) {
  switch (c) {
    case Consistency::Equal: return "equal";
    case Consistency::Mismatch: return "mismatch";
    case Consistency::Unstable: return "unstable";
    case Consistency::NotChecked: return "not_checked";
  }
  return "not_checked";
}

Consistency parse_consistency(std::string_view text) {
  for (const Consistency c : {Consistency::Equal, Consistency::Mismatch, Consistency::Unstable, Consistency::NotChecked})
    if (to_string(c) == text) return c;
  fail(Errc::invalid_data, "unknown consistency verdict '" + std::string(text) + "'");
}

void validate(const RunPlan& plan) {
  if (plan.repetitions < 1) fail(Errc::invalid_argument, "repetitions must be at least 1");
  if (plan.specs.empty()) fail(Errc::invalid_argument, "plan has no benchmarks");
  if (plan.backend_id.empty()) fail(Errc::invalid_argument, "plan has no backend");
  for (const auto& s : plan.specs) {
    if (!is_read_benchmark(s.id))
      fail(Errc::invalid_argument, std::string(to_string(s.id)) + " is not a query benchmark");
    validate(s);
  }
}

std::vector<BenchmarkSpec> select_specs(const PlanSelection& selection) {
  std::vector<BenchmarkId> ids;
  const std::string all = trim(selection.benchmarks);
  if (all == "all") {
    ids.assign(read_benchmarks().begin(), read_benchmarks().end());
  } else {
    std::istringstream in(all);
    std::string item;
    while (std::getline(in, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      const auto id = try_parse_benchmark_id(item);
      if (!id || !is_read_benchmark(*id)) {
        std::string valid;
        for (const BenchmarkId r : read_benchmarks()) valid += (valid.empty() ? "" : ", ") + std::string(to_string(r));
        fail(Errc::invalid_argument, "unknown benchmark '" + item + "'; valid ids: " + valid + " or all");
      }
      if (std::find(ids.begin(), ids.end(), *id) == ids.end()) ids.push_back(*id);
    }
    if (ids.empty()) fail(Errc::invalid_argument, "no benchmarks selected");
    std::sort(ids.begin(), ids.end(), [](BenchmarkId a, BenchmarkId b) { return catalogue_index(a) < catalogue_index(b); });
  }
  std::vector<BenchmarkSpec> specs;
  for (const BenchmarkId id : ids) specs.push_back(make_spec(id, selection.catalog));
  return specs;
}

PlanFile read_plan_file(const fs::path& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    fail(Errc::config, e.what());
  }
  const auto section = tree.get_child_optional("plan");
  if (!section) fail(Errc::config, path.string() + ": missing [plan] section");
  PlanFile file;
  RunPlan& plan = file.plan;
  PlanSelection& selection = file.selection;
  for (const auto& [key, node] : *section) {
    const std::string v = trim(node.data());
    const std::string where = path.string() + ": " + key;
    if (key == "backend") {
      plan.backend_id = v;
    } else if (key == "reference") {
      plan.reference_id = v;
    } else if (key == "benchmarks") {
      selection.benchmarks = v;
    } else if (key == "repetitions") {
      int n = 0;
      const auto r = std::from_chars(v.data(), v.data() + v.size(), n);
      if (r.ec != std::errc() || r.ptr != v.data() + v.size()) fail(Errc::config, where + ": expected an integer");
      plan.repetitions = n;
    } else if (key == "cache_clear_command") {
      plan.cache_clear_command = v;
    } else if (key == "warm_up") {
      plan.warm_up = parse_bool(where, v);
    } else if (key == "day") {
      try {
        selection.catalog.anchor_day = parse_date(v);
      } catch (const Error& e) {
        fail(Errc::config, where + ": " + e.what());
      }
    } else if (key == "symbol") {
      selection.catalog.symbol = v;
    } else if (key == "hourly_tv2") {
      selection.catalog.hourly_tv2 = parse_bool(where, v);
    } else {
      fail(Errc::config, where + ": unknown key");
    }
  }
  try {
    plan.specs = select_specs(selection);
    validate(plan);
  } catch (const Error& e) {
    fail(Errc::config, path.string() + ": " + e.what());
  }
  return file;
}

RunPlan load_plan(const fs::path& path) { return read_plan_file(path).plan; }

double arithmetic_mean(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (const double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

std::vector<BenchmarkResult> run(const RunPlan& plan, backends::Backend& target, backends::Backend& reference) {
  validate(plan);
  const bool same = &target == &reference;
  const bool clear = !is_none(plan.cache_clear_command);
  std::vector<BenchmarkResult> results;

  for (const BenchmarkSpec& spec : plan.specs) {
    BenchmarkResult r;
    r.id = spec.id;
    r.backend = target.descriptor().id;
    r.query_storage_supported = target.capabilities().reports_query_storage;
    std::vector<double> wall, server;
    bool server_complete = target.capabilities().reports_server_latency;
    ResultTable last;
    try {
      const std::string query = render(target.asset(spec.id), spec);
      if (plan.warm_up) target.execute(query);
      for (int rep = 0; rep < plan.repetitions; ++rep) {
        if (clear) clear_cache(plan.cache_clear_command);
        const auto t0 = Clock::now();
        backends::RawResult raw = target.execute(query);
        const auto t1 = Clock::now();
        wall.push_back(to_ms(t1 - t0));
        if (raw.server_elapsed)
          server.push_back(to_ms(*raw.server_elapsed));
        else
          server_complete = false;
        if (r.query_storage_supported && raw.query_bytes)
          r.query_storage_bytes = std::max(r.query_storage_bytes.value_or(0), *raw.query_bytes);
        last = backends::normalize(raw, spec.id);
        const std::string digest = table_digest(last);
        if (rep == 0)
          r.result_digest = digest;
        else if (digest != r.result_digest)
          r.digests_stable = false;
      }
      r.rows = last.rows.size();
    } catch (const std::exception& e) {
      r.error = e.what();
    }

    if (server_complete && server.size() == wall.size()) {
      r.latency_source = LatencySource::ServerReported;
      r.latencies_ms = server;
    } else {
      r.latency_source = LatencySource::HarnessWallClock;
      r.latencies_ms = wall;
    }
    r.mean_latency_ms = arithmetic_mean(r.latencies_ms);

    if (!r.error) {
      if (!r.digests_stable) {
        r.consistency = Consistency::Unstable;
        r.detail = "result digest changed between repetitions";
      } else if (same) {
        r.consistency = Consistency::Equal;
      } else {
        try {
          const ResultTable expected = backends::normalize(reference.run(spec), spec.id);
          const backends::Verdict v = backends::compare(last, expected);
          r.consistency = v.equal ? Consistency::Equal : Consistency::Mismatch;
          r.detail = v.detail;
        } catch (const std::exception& e) {
          r.error = std::string("reference ") + reference.descriptor().id + ": " + e.what();
        }
      }
    }
    results.push_back(std::move(r));
  }
  return results;
}

int exit_code(const std::vector<BenchmarkResult>& results) {
  bool inconsistent = false;
  for (const auto& r : results) {
    if (r.error) return 1;
    if (r.consistency != Consistency::Equal) inconsistent = true;
  }
  return inconsistent ? 2 : 0;
}

double throughput_mb_s(std::uint64_t bytes, double elapsed_ms) {
  if (elapsed_ms <= 0.0) fail(Errc::invalid_argument, "elapsed time must be positive");
  return static_cast<double>(bytes) / 1e6 / (elapsed_ms / 1e3);
}

IngestResult run_ingest_benchmark(backends::Backend& backend, const std::vector<fs::path>& csv_paths) {
  if (csv_paths.empty()) fail(Errc::invalid_argument, "no input files");
  for (const auto& p : csv_paths)
    if (!fs::is_regular_file(p)) fail(Errc::not_found, p.string() + ": no such file");
  if (!backend.is_fresh())
    fail(Errc::already_exists, "backend '" + backend.descriptor().id + "' already holds data; ingest needs empty tables");
  const auto t0 = Clock::now();
  const backends::IngestOutcome out = backend.ingest(csv_paths);
  const auto t1 = Clock::now();
  IngestResult r;
  r.backend = backend.descriptor().id;
  r.elapsed_ms = to_ms(t1 - t0);
  r.rows = out.rows;
  r.source_file_bytes = out.source_file_bytes;
  if (r.source_file_bytes == 0)
    for (const auto& p : csv_paths) r.source_file_bytes += fs::file_size(p);
  r.throughput_mb_s = throughput_mb_s(r.source_file_bytes, r.elapsed_ms);
  return r;
}

StorageOutcome run_storage_benchmark(backends::Backend& backend, std::uint64_t source_file_bytes) {
  StorageOutcome out;
  out.backend = backend.descriptor().id;
  if (!backend.capabilities().reports_data_bytes) return out;
  out.report = make_storage_report(backend.data_bytes(), source_file_bytes);
  out.supported = true;
  return out;
}

ReportFormat parse_report_format(std::string_view text) {
  if (text == "json") return ReportFormat::Json;
  if (text == "csv") return ReportFormat::Csv;
  if (text == "plotdata") return ReportFormat::Plotdata;
  fail(Errc::invalid_argument, "unknown report format '" + std::string(text) + "'; expected json, csv or plotdata");
}

namespace {

json result_json(const BenchmarkResult& r) {
  json j;
  j["benchmark_id"] = std::string(to_string(r.id));
  j["category"] = std::string(to_string(info(r.id).category));
  j["backend_id"] = r.backend;
  j["latencies_ms"] = r.latencies_ms;
  j["mean_latency_ms"] = r.mean_latency_ms;
  j["latency_source"] = std::string(to_string(r.latency_source));
  if (!r.query_storage_supported)
    j["query_storage_bytes"] = "unsupported";
  else if (r.query_storage_bytes)
    j["query_storage_bytes"] = *r.query_storage_bytes;
  else
    j["query_storage_bytes"] = nullptr;
  j["result_digest"] = r.result_digest;
  j["digests_stable"] = r.digests_stable;
  j["rows"] = r.rows;
  j["consistency"] = std::string(to_string(r.consistency));
  j["consistency_detail"] = r.detail;
  j["error"] = r.error ? json(*r.error) : json(nullptr);
  return j;
}

BenchmarkResult result_from_json(const json& j) {
  BenchmarkResult r;
  r.id = parse_benchmark_id(j.at("benchmark_id").get<std::string>());
  r.backend = j.at("backend_id").get<std::string>();
  r.latencies_ms = j.at("latencies_ms").get<std::vector<double>>();
  r.mean_latency_ms = j.at("mean_latency_ms").get<double>();
  r.latency_source = parse_latency_source(j.at("latency_source").get<std::string>());
  const json& qs = j.at("query_storage_bytes");
  if (qs.is_string()) {
    if (qs.get<std::string>() != "unsupported") fail(Errc::invalid_data, "query_storage_bytes: unexpected string");
    r.query_storage_supported = false;
  } else {
    r.query_storage_supported = true;
    if (!qs.is_null()) r.query_storage_bytes = qs.get<std::uint64_t>();
  }
  r.result_digest = j.at("result_digest").get<std::string>();
  r.digests_stable = j.at("digests_stable").get<bool>();
  r.rows = j.at("rows").get<std::uint64_t>();
  r.consistency = parse_consistency(j.at("consistency").get<std::string>());
  r.detail = j.value("consistency_detail", std::string());
  if (j.contains("error") && !j.at("error").is_null()) r.error = j.at("error").get<std::string>();
  return r;
}

}  // namespace

namespace {

json ingest_json(const IngestResult& w) {
  return {{"backend_id", w.backend},
          {"elapsed_ms", w.elapsed_ms},
          {"rows", w.rows},
          {"source_file_bytes", w.source_file_bytes},
          {"throughput_mb_s", w.throughput_mb_s}};
}

json storage_json(const StorageOutcome& s) {
  if (!s.supported) return {{"backend_id", s.backend}, {"efficiency_percent", "unsupported"}};
  return {{"backend_id", s.backend},
          {"data_bytes_on_disk", s.report.data_bytes_on_disk},
          {"source_file_bytes", s.report.source_file_bytes},
          {"efficiency_percent", s.report.efficiency_percent}};
}

}  // namespace

std::string to_json(const Report& report) {
  json j;
  j["results"] = json::array();
  for (const auto& r : report.results) j["results"].push_back(result_json(r));
  j["ingest"] = report.ingest ? ingest_json(*report.ingest) : json(nullptr);
  j["storage"] = report.storage ? storage_json(*report.storage) : json(nullptr);
  return j.dump(2) + "\n";
}

std::string to_json_lines(const Report& report) {
  std::string out;
  for (const auto& r : report.results) out += result_json(r).dump() + "\n";
  if (report.ingest) {
    json w = ingest_json(*report.ingest);
    w["benchmark_id"] = "W";
    out += w.dump() + "\n";
  }
  if (report.storage) {
    json s = storage_json(*report.storage);
    s["benchmark_id"] = "SE";
    out += s.dump() + "\n";
  }
  return out;
}

Report report_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(Errc::invalid_data, std::string("report: ") + e.what());
  }
  Report report;
  std::size_t index = 0;
  try {
    if (!j.is_object()) fail(Errc::invalid_data, "report: top level must be an object");
    for (const json& r : j.at("results")) {
      report.results.push_back(result_from_json(r));
      ++index;
    }
    if (j.contains("ingest") && !j["ingest"].is_null()) {
      const json& w = j["ingest"];
      report.ingest = IngestResult{w.at("backend_id").get<std::string>(), w.at("elapsed_ms").get<double>(),
                                   w.at("rows").get<std::uint64_t>(), w.at("source_file_bytes").get<std::uint64_t>(),
                                   w.at("throughput_mb_s").get<double>()};
    }
    if (j.contains("storage") && !j["storage"].is_null()) {
      const json& s = j["storage"];
      StorageOutcome out;
      out.backend = s.at("backend_id").get<std::string>();
      if (!s.at("efficiency_percent").is_string()) {
        out.supported = true;
        out.report.data_bytes_on_disk = s.at("data_bytes_on_disk").get<std::uint64_t>();
        out.report.source_file_bytes = s.at("source_file_bytes").get<std::uint64_t>();
        out.report.efficiency_percent = s.at("efficiency_percent").get<double>();
      }
      report.storage = out;
    }
  } catch (const json::exception& e) {
    fail(Errc::invalid_data, "report: results[" + std::to_string(index) + "]: " + e.what());
  } catch (const Error& e) {
    if (e.code() != Errc::invalid_data)
      fail(Errc::invalid_data, "report: results[" + std::to_string(index) + "]: " + e.what());
    throw;
  }
  return report;
}

Report read_report(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io, path.string() + ": cannot open");
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return report_from_json(text.str());
  } catch (const Error& e) {
    fail(e.code(), path.string() + ": " + e.what());
  }
}

std::string to_csv(const Report& report) {
  std::vector<const BenchmarkResult*> rows;
  for (const auto& r : report.results) rows.push_back(&r);
  std::stable_sort(rows.begin(), rows.end(), [](const BenchmarkResult* a, const BenchmarkResult* b) {
    return info(a->id).category < info(b->id).category;
  });
  std::string out = "benchmark,category,backend,repetitions,mean_latency_ms,latency_source,query_storage_bytes,consistency\n";
  for (const BenchmarkResult* r : rows) {
    out += to_string(r->id);
    out += ',';
    out += to_string(info(r->id).category);
    out += ',' + r->backend + ',' + std::to_string(r->latencies_ms.size()) + ',';
    if (!r->error) out += format_double(r->mean_latency_ms);
    out += ',';
    out += to_string(r->latency_source);
    out += ',';
    if (!r->query_storage_supported)
      out += "unsupported";
    else if (r->query_storage_bytes)
      out += std::to_string(*r->query_storage_bytes);
    out += ',';
    out += r->error ? "error" : std::string(to_string(r->consistency));
    out += '\n';
  }
  return out;
}

std::vector<fs::path> emit_report(const Report& report, ReportFormat format, const fs::path& path) {
  if (format == ReportFormat::Json) {
    write_file(path, to_json(report));
    return {path};
  }
  if (format == ReportFormat::Csv) {
    write_file(path, to_csv(report));
    return {path};
  }

  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec) fail(Errc::io, path.string() + ": " + ec.message());
  std::map<Category, std::string> files;
  for (const auto& r : report.results) {
    if (r.error) continue;
    std::string& f = files[info(r.id).category];
    if (f.empty()) f = "# benchmark backend mean_latency_ms latencies_ms...\n";
    f += std::string(to_string(r.id)) + ' ' + r.backend + ' ' + format_double(r.mean_latency_ms);
    for (const double v : r.latencies_ms) f += ' ' + format_double(v);
    f += '\n';
  }
  if (report.ingest) {
    const auto& w = *report.ingest;
    files[Category::Writing] = "# backend throughput_mb_s elapsed_ms rows source_file_bytes\n" + w.backend + ' ' +
                               format_double(w.throughput_mb_s) + ' ' + format_double(w.elapsed_ms) + ' ' +
                               std::to_string(w.rows) + ' ' + std::to_string(w.source_file_bytes) + '\n';
  }
  if (report.storage && report.storage->supported) {
    const auto& s = *report.storage;
    files[Category::StorageEfficiency] = "# backend efficiency_percent data_bytes_on_disk source_file_bytes\n" +
                                         s.backend + ' ' + format_double(s.report.efficiency_percent) + ' ' +
                                         std::to_string(s.report.data_bytes_on_disk) + ' ' +
                                         std::to_string(s.report.source_file_bytes) + '\n';
  }
  std::vector<fs::path> written;
  for (const auto& [category, text] : files) {
    const fs::path file = path / category_file(category);
    write_file(file, text);
    written.push_back(file);
  }
  return written;
}

}  // namespace tickbench::harness
