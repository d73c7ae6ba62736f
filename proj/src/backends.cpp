#include "tickbench/backends.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "http_adapters.hpp"
#include "tickbench/analytics.hpp"
#include "tickbench/error.hpp"

#ifndef TICKBENCH_ASSET_DIR
#define TICKBENCH_ASSET_DIR "assets"
#endif

namespace tickbench::backends {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

Capabilities capabilities_of(const std::string& type) {
  if (type == "embedded") return {true, true, true};
  if (type == "clickhouse") return {true, false, true};
  if (type == "influxdb") return {false, false, false};
  if (type == "timescaledb") return {true, false, true};
  if (type == "kdb") return {false, true, true};
  fail(Errc::config, "unknown backend type '" + type + "'");
}

bool parse_flag(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(Errc::config, key + ": expected true or false, got '" + v + "'");
}

// --- literal formatting ------------------------------------------------------

std::string two(int v) {
  std::string s = std::to_string(v);
  return s.size() < 2 ? "0" + s : s;
}

struct Civil {
  std::string date;  // YYYY-MM-DD
  std::string time;  // HH:MM:SS
  std::int64_t nanos = 0;
};

Civil civil(Timestamp ts) {
  const std::string iso = format_timestamp(ts);  // YYYY-MM-DDTHH:MM:SS.fffffffffZ
  Civil c;
  c.date = iso.substr(0, 10);
  c.time = iso.substr(11, 8);
  c.nanos = std::stoll(iso.substr(20, 9));
  return c;
}

/// ".fffffffff" trimmed of trailing zeros, empty when whole.
std::string fraction(std::int64_t nanos) {
  if (nanos == 0) return {};
  std::string f = std::to_string(nanos);
  f.insert(0, 9 - f.size(), '0');
  while (f.back() == '0') f.pop_back();
  return "." + f;
}

std::string quote(std::string_view s, char q) {
  std::string out(1, q);
  for (const char c : s) {
    if (c == q || (q == '"' && c == '\\')) out.push_back(q == '\'' ? '\'' : '\\');
    out.push_back(c);
  }
  out.push_back(q);
  return out;
}

struct WidthUnit {
  std::int64_t count;
  const char* name;
};

WidthUnit split_width(Duration d) {
  const std::int64_t ns = d.count();
  if (ns % kDay.count() == 0) return {ns / kDay.count(), "day"};
  if (ns % kHour.count() == 0) return {ns / kHour.count(), "hour"};
  if (ns % kMinute.count() == 0) return {ns / kMinute.count(), "minute"};
  if (ns % kSecond.count() == 0) return {ns / kSecond.count(), "second"};
  return {ns, "nanosecond"};
}

std::string timestamp_literal(const std::string& dialect, Timestamp ts) {
  const Civil c = civil(ts);
  if (dialect == "embedded") return format_timestamp(ts);
  if (dialect == "timescaledb") return "TIMESTAMP '" + c.date + " " + c.time + fraction(c.nanos) + "'";
  if (dialect == "clickhouse") return "toDateTime64('" + c.date + " " + c.time + fraction(c.nanos) + "', 9, 'UTC')";
  if (dialect == "influxdb") return c.date + "T" + c.time + fraction(c.nanos) + "Z";
  if (dialect == "kdb") {
    std::string d = c.date;
    std::replace(d.begin(), d.end(), '-', '.');
    std::string n = std::to_string(c.nanos);
    return d + "D" + c.time + "." + std::string(9 - n.size(), '0') + n;
  }
  fail(Errc::config, "unknown dialect '" + dialect + "'");
}

std::string width_literal(const std::string& dialect, Duration d) {
  const WidthUnit u = split_width(d);
  if (dialect == "embedded") return std::to_string(d.count());
  if (dialect == "timescaledb") {
    std::string unit = u.name == std::string("nanosecond") ? "microsecond" : u.name;
    std::int64_t n = u.name == std::string("nanosecond") ? u.count / 1000 : u.count;
    return "'" + std::to_string(n) + " " + unit + (n == 1 ? "" : "s") + "'";
  }
  if (dialect == "clickhouse") {
    std::string unit = u.name;
    std::transform(unit.begin(), unit.end(), unit.begin(), [](unsigned char ch) { return std::toupper(ch); });
    return "INTERVAL " + std::to_string(u.count) + " " + unit;
  }
  if (dialect == "influxdb") {
    static const std::map<std::string, std::string> suffix{
        {"day", "d"}, {"hour", "h"}, {"minute", "m"}, {"second", "s"}, {"nanosecond", "ns"}};
    return std::to_string(u.count) + suffix.at(u.name);
  }
  if (dialect == "kdb") {
    const std::int64_t ns = d.count();
    const std::int64_t days = ns / kDay.count();
    std::int64_t rest = ns % kDay.count();
    const int h = static_cast<int>(rest / kHour.count());
    rest %= kHour.count();
    const int m = static_cast<int>(rest / kMinute.count());
    rest %= kMinute.count();
    const int s = static_cast<int>(rest / kSecond.count());
    std::string n = std::to_string(rest % kSecond.count());
    return std::to_string(days) + "D" + two(h) + ":" + two(m) + ":" + two(s) + "." + std::string(9 - n.size(), '0') + n;
  }
  fail(Errc::config, "unknown dialect '" + dialect + "'");
}

std::string string_literal(const std::string& dialect, const std::string& value) {
  if (dialect == "embedded") return value;
  if (dialect == "timescaledb" || dialect == "clickhouse") return quote(value, '\'');
  if (dialect == "influxdb") return quote(value, '"');
  if (dialect == "kdb") return "`$" + quote(value, '"');
  fail(Errc::config, "unknown dialect '" + dialect + "'");
}

// --- normalization helpers -----------------------------------------------------

Cell parse_cell(const std::string& text, ColumnClass kind, const std::string& column, std::size_t row) {
  auto bad = [&](const char* what) -> Cell {
    fail(Errc::schema_mismatch,
         "row " + std::to_string(row) + " column " + column + ": cannot read '" + text + "' as " + what);
  };
  switch (kind) {
    case ColumnClass::Timestamp: {
      if (auto ts = try_parse_timestamp(text)) return *ts;
      return bad("timestamp");
    }
    case ColumnClass::String: return text;
    case ColumnClass::Decimal: {
      if (auto d = Decimal::try_parse(text)) return *d;
      // Servers that print decimals through binary floating point.
      double v = 0;
      const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
      if (r.ec != std::errc() || r.ptr != text.data() + text.size() || !std::isfinite(v)) return bad("decimal");
      return Decimal::from_double(v);
    }
    case ColumnClass::Float: {
      double v = 0;
      const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
      if (r.ec != std::errc() || r.ptr != text.data() + text.size()) return bad("number");
      return v;
    }
  }
  return bad("value");
}

bool cell_less(const Cell& a, const Cell& b) {
  return std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        return x < std::get<T>(b);
      },
      a);
}

std::string describe(const Cell& c) { return format_cell(c); }

}  // namespace

// ---------------------------------------------------------------------------

std::string BackendDescriptor::get(const std::string& key, const std::string& fallback) const {
  const auto it = connection.find(key);
  return it == connection.end() ? fallback : it->second;
}

fs::path default_asset_root() {
  if (const char* env = std::getenv("TICKBENCH_ASSETS"); env != nullptr && *env != '\0') return env;
  return TICKBENCH_ASSET_DIR;
}

const BackendDescriptor& Config::backend(const std::string& id) const {
  const auto it = backends.find(id);
  if (it != backends.end()) return it->second;
  std::string known;
  for (const auto& [name, d] : backends) known += (known.empty() ? "" : ", ") + name;
  fail(Errc::config, "unknown backend '" + id + "' (configured: " + known + ")");
}

Config load_config(const std::optional<fs::path>& path, const fs::path& store_dir) {
  Config config;
  BackendDescriptor embedded;
  embedded.id = "embedded";
  embedded.type = "embedded";
  embedded.connection["root"] = store_dir.string();
  embedded.asset_dir = default_asset_root() / "embedded";
  embedded.capabilities = capabilities_of("embedded");
  config.backends["embedded"] = embedded;
  if (!path) return config;

  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path->string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    fail(Errc::config, e.what());
  }
  const fs::path base = path->parent_path();
  for (const auto& [section, body] : tree) {
    if (body.empty()) fail(Errc::config, path->string() + ": '" + section + "' is not a section");
    BackendDescriptor d;
    d.id = section;
    d.type = body.get<std::string>("type", section);
    d.capabilities = capabilities_of(d.type);
    for (const auto& [key, value] : body) {
      const std::string v = value.get_value<std::string>();
      if (key == "type") continue;
      if (key == "assets") {
        d.asset_dir = fs::path(v).is_absolute() ? fs::path(v) : base / v;
      } else if (key == "reports_server_latency") {
        d.capabilities.reports_server_latency = parse_flag(v, key);
      } else if (key == "reports_query_storage") {
        d.capabilities.reports_query_storage = parse_flag(v, key);
      } else if (key == "reports_data_bytes") {
        d.capabilities.reports_data_bytes = parse_flag(v, key);
      } else if (key == "root") {
        d.connection[key] = fs::path(v).is_absolute() ? v : (base / v).string();
      } else {
        d.connection[key] = v;
      }
    }
    if (d.asset_dir.empty()) d.asset_dir = default_asset_root() / d.type;
    if (d.type == "embedded" && !d.connection.count("root")) d.connection["root"] = store_dir.string();
    config.backends[section] = std::move(d);
  }
  return config;
}

std::optional<fs::path> resolve_config_path(const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return fs::path(*flag);
  if (const char* env = std::getenv("TICKBENCH_CONFIG"); env != nullptr && *env != '\0') return fs::path(env);
  return std::nullopt;
}

// ---------------------------------------------------------------------------

QueryAsset load_asset(const fs::path& dir, BenchmarkId id, const std::string& dialect) {
  const fs::path path = dir / (std::string(to_string(id)) + ".tpl");
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::config, "missing query asset " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return {id, text.str(), dialect};
}

std::string render(const QueryAsset& asset, const BenchmarkSpec& spec) {
  if (asset.id != spec.id) {
    fail(Errc::config, "asset for " + std::string(to_string(asset.id)) + " used with spec " + std::string(to_string(spec.id)));
  }
  const std::string& d = asset.dialect;
  auto value = [&](const std::string& name) -> std::string {
    auto missing = [&]() -> std::string {
      fail(Errc::config, std::string(to_string(spec.id)) + ": no value for placeholder {{" + name + "}}");
    };
    if (name == "range_begin") return timestamp_literal(d, spec.range.begin);
    if (name == "range_end") return timestamp_literal(d, spec.range.end);
    if (name == "symbol") return spec.symbol.empty() ? missing() : string_literal(d, spec.symbol);
    if (name == "side") return spec.side ? string_literal(d, std::string(to_string(*spec.side))) : missing();
    if (name == "inner_width") return spec.inner_width.count() > 0 ? width_literal(d, spec.inner_width) : missing();
    if (name == "outer_width") return spec.outer_width.count() > 0 ? width_literal(d, spec.outer_width) : missing();
    if (name == "depth_level") return spec.depth_level > 0 ? std::to_string(spec.depth_level) : missing();
    if (name == "random_at") return spec.rng_seed ? timestamp_literal(d, draw_random_at(spec)) : missing();
    fail(Errc::config, std::string(to_string(spec.id)) + ": unknown placeholder {{" + name + "}}");
  };

  std::string out;
  const std::string& t = asset.text;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t open = t.find("{{", pos);
    if (open == std::string::npos) {
      out.append(t, pos, std::string::npos);
      return out;
    }
    const std::size_t close = t.find("}}", open + 2);
    if (close == std::string::npos) fail(Errc::config, "unterminated placeholder in asset " + std::string(to_string(asset.id)));
    out.append(t, pos, open - pos);
    out += value(trim(std::string_view(t).substr(open + 2, close - open - 2)));
    pos = close + 2;
  }
}

// ---------------------------------------------------------------------------

RawResult to_raw(const ResultTable& table) {
  RawResult raw;
  for (const auto& c : table.columns) raw.columns.push_back(c.name);
  raw.rows.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    std::vector<std::string> cells;
    cells.reserve(row.size());
    for (const auto& cell : row) cells.push_back(format_cell(cell));
    raw.rows.push_back(std::move(cells));
  }
  return raw;
}

void canonical_sort(ResultTable& table, BenchmarkId) {
  // Key columns lead the canonical column order, so comparing whole rows
  // lexicographically sorts by the keys first.
  std::stable_sort(table.rows.begin(), table.rows.end(), [](const Row& a, const Row& b) {
    for (std::size_t c = 0; c < a.size(); ++c) {
      if (cell_less(a[c], b[c])) return true;
      if (cell_less(b[c], a[c])) return false;
    }
    return false;
  });
}

ResultTable normalize(const RawResult& raw, BenchmarkId id) {
  const auto& canon = analytics::canonical_columns(id);
  std::vector<std::size_t> source(canon.size());
  for (std::size_t c = 0; c < canon.size(); ++c) {
    auto find = [&](std::string_view name) -> std::optional<std::size_t> {
      for (std::size_t i = 0; i < raw.columns.size(); ++i) {
        if (raw.columns[i] == name) return i;
      }
      return std::nullopt;
    };
    std::optional<std::size_t> hit = find(canon[c].name);
    if (!hit && c == 0 && canon[c].kind == ColumnClass::Timestamp) {
      for (const char* alias : {"_time", "time", "bucket", "window"}) {
        if ((hit = find(alias))) break;
      }
    }
    if (!hit && c + 1 == canon.size()) hit = find("_value");
    if (!hit) {
      std::string got;
      for (const auto& n : raw.columns) got += (got.empty() ? "" : ", ") + n;
      fail(Errc::schema_mismatch,
           std::string(to_string(id)) + ": result has no column '" + canon[c].name + "' (columns: " + got + ")");
    }
    source[c] = *hit;
  }

  ResultTable table(canon);
  table.rows.reserve(raw.rows.size());
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    const auto& in = raw.rows[r];
    if (in.size() != raw.columns.size()) {
      fail(Errc::schema_mismatch, "row " + std::to_string(r) + " has " + std::to_string(in.size()) + " cells, expected " +
                                      std::to_string(raw.columns.size()));
    }
    Row row;
    row.reserve(canon.size());
    for (std::size_t c = 0; c < canon.size(); ++c) row.push_back(parse_cell(in[source[c]], canon[c].kind, canon[c].name, r));
    table.rows.push_back(std::move(row));
  }
  canonical_sort(table, id);
  return table;
}

Verdict compare(const ResultTable& a, const ResultTable& b) {
  Verdict v;
  auto mismatch = [&](std::string detail, std::optional<std::size_t> row, std::optional<std::size_t> col) {
    v.equal = false;
    v.detail = std::move(detail);
    v.row = row;
    v.column = col;
    return v;
  };
  if (a.columns != b.columns) {
    auto names = [](const ResultTable& t) {
      std::string s;
      for (const auto& c : t.columns) s += (s.empty() ? "" : ",") + c.name + ":" + std::string(to_string(c.kind));
      return s;
    };
    return mismatch("columns differ: [" + names(a) + "] vs [" + names(b) + "]", std::nullopt, std::nullopt);
  }
  if (a.rows.size() != b.rows.size()) {
    return mismatch("row counts differ: " + std::to_string(a.rows.size()) + " vs " + std::to_string(b.rows.size()),
                    std::nullopt, std::nullopt);
  }
  for (std::size_t r = 0; r < a.rows.size(); ++r) {
    for (std::size_t c = 0; c < a.columns.size(); ++c) {
      const Cell& x = a.rows[r][c];
      const Cell& y = b.rows[r][c];
      bool same = false;
      if (a.columns[c].kind == ColumnClass::Float) {
        const double p = std::get<double>(x);
        const double q = std::get<double>(y);
        const double tol = std::max(kAbsoluteTolerance, kRelativeTolerance * std::max(std::fabs(p), std::fabs(q)));
        same = std::fabs(p - q) <= tol || (std::isnan(p) && std::isnan(q));
      } else {
        same = x == y;
      }
      if (!same) {
        return mismatch("row " + std::to_string(r) + " column " + a.columns[c].name + ": " + describe(x) + " vs " +
                            describe(y),
                        r, c);
      }
    }
  }
  return v;
}

// ---------------------------------------------------------------------------

std::uint64_t Backend::data_bytes() {
  fail(Errc::unsupported, descriptor_.id + ": data_bytes is not supported");
}

QueryAsset Backend::asset(BenchmarkId id) const { return load_asset(descriptor_.asset_dir, id, descriptor_.type); }

RawResult Backend::run(const BenchmarkSpec& spec) { return execute(render(asset(spec.id), spec)); }

// ---------------------------------------------------------------------------

EmbeddedQuery parse_embedded_query(const std::string& text) {
  EmbeddedQuery q;
  std::optional<BenchmarkId> id;
  std::optional<Timestamp> begin, end;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::vector<std::pair<std::string, std::string>> fields;
  std::vector<int> lines;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(Errc::query, "line " + std::to_string(line_no) + ": expected key = value");
    fields.emplace_back(trim(std::string_view(s).substr(0, eq)), trim(std::string_view(s).substr(eq + 1)));
    lines.push_back(line_no);
  }
  auto error = [&](std::size_t i, const std::string& msg) -> void {
    fail(Errc::query, "line " + std::to_string(lines[i]) + ": " + fields[i].first + ": " + msg);
  };
  auto duration_of = [&](std::size_t i) {
    std::int64_t v = 0;
    const std::string& s = fields[i].second;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size() || v <= 0) error(i, "expected a positive nanosecond count");
    return Duration{v};
  };
  auto timestamp_of = [&](std::size_t i) {
    const auto ts = try_parse_timestamp(fields[i].second);
    if (!ts) error(i, "malformed timestamp '" + fields[i].second + "'");
    return *ts;
  };

  for (std::size_t i = 0; i < fields.size(); ++i) {
    const auto& [key, value] = fields[i];
    if (key == "benchmark") {
      id = try_parse_benchmark_id(value);
      if (!id) error(i, "unknown benchmark '" + value + "'");
    } else if (key == "range_begin") {
      begin = timestamp_of(i);
    } else if (key == "range_end") {
      end = timestamp_of(i);
    } else if (key == "symbol") {
      q.spec.symbol = value;
    } else if (key == "side") {
      if (value != "buy" && value != "sell") error(i, "expected buy or sell");
      q.spec.side = parse_side(value);
    } else if (key == "inner_width") {
      q.spec.inner_width = duration_of(i);
    } else if (key == "outer_width") {
      q.spec.outer_width = duration_of(i);
    } else if (key == "depth_level") {
      int v = 0;
      const auto r = std::from_chars(value.data(), value.data() + value.size(), v);
      if (r.ec != std::errc() || r.ptr != value.data() + value.size()) error(i, "expected an integer");
      q.spec.depth_level = v;
    } else if (key == "at") {
      q.options.top_of_book_at = timestamp_of(i);
    } else if (key == "stddev") {
      if (value == "sample") {
        q.options.stddev = analytics::StddevKind::Sample;
      } else if (value == "population") {
        q.options.stddev = analytics::StddevKind::Population;
      } else {
        error(i, "expected sample or population");
      }
    } else {
      error(i, "unknown key");
    }
  }
  if (!id) fail(Errc::query, "missing benchmark");
  if (!begin || !end) fail(Errc::query, "missing range_begin or range_end");
  if (!(*begin < *end)) fail(Errc::query, "range_begin must precede range_end");
  const BenchmarkInfo& meta = info(*id);
  q.spec.id = *id;
  q.spec.category = meta.category;
  q.spec.io = meta.io;
  q.spec.compute = meta.compute;
  q.spec.range = TimeRange::make(*begin, *end);
  // The instant is explicit here, so the seed that would draw it is moot.
  if (*id == BenchmarkId::OT) {
    if (!q.options.top_of_book_at) fail(Errc::query, "O-T needs at");
    q.spec.rng_seed = 0;
  }
  try {
    validate(q.spec);
  } catch (const Error& e) {
    fail(Errc::query, e.what());
  }
  return q;
}

EmbeddedBackend::EmbeddedBackend(BackendDescriptor descriptor) : Backend(std::move(descriptor)) {}

EmbeddedBackend::~EmbeddedBackend() = default;

void EmbeddedBackend::connect() {
  if (engine_) return;
  EngineOptions options;
  options.compression = CompressionPolicy::parse(descriptor().get("compress", "none"));
  const std::string sync = descriptor().get("sync", "true");
  options.sync = sync != "false" && sync != "0";
  engine_ = std::make_unique<Engine>(descriptor().get("root", "tickbench_store"), options);
}

Engine& EmbeddedBackend::engine() {
  connect();
  return *engine_;
}

bool EmbeddedBackend::is_fresh() { return engine().empty(TableKind::Trades) && engine().empty(TableKind::Books); }

IngestOutcome EmbeddedBackend::ingest(const std::vector<fs::path>& csv_paths) {
  IngestOutcome out;
  for (const auto& p : csv_paths) {
    try {
      const IngestReport r = engine().ingest_csv(p);
      out.elapsed += r.elapsed;
      out.rows += r.rows;
      out.source_file_bytes += r.source_file_bytes;
    } catch (const Error& e) {
      fail(e.code(), std::string(e.what()) + " (" + std::to_string(out.rows) + " rows ingested before this file)");
    }
  }
  return out;
}

RawResult EmbeddedBackend::execute(const std::string& query) {
  const EmbeddedQuery q = parse_embedded_query(query);
  const ExecuteResult r = engine().execute(q.spec, q.options);
  RawResult raw = to_raw(r.table);
  raw.server_elapsed = r.server_elapsed;
  raw.query_bytes = r.peak_query_bytes;
  return raw;
}

std::uint64_t EmbeddedBackend::data_bytes() {
  // The manifest is shared, so count it once.
  const std::uint64_t manifest = fs::exists(engine().root() / "manifest.json") ? fs::file_size(engine().root() / "manifest.json") : 0;
  return engine().data_bytes(TableKind::Trades) + engine().data_bytes(TableKind::Books) - manifest;
}

std::optional<IngestOutcome> EmbeddedBackend::recorded_ingest() {
  IngestOutcome out;
  std::size_t ingests = 0;
  for (const TableKind kind : {TableKind::Trades, TableKind::Books}) {
    const IngestTotals t = engine().recorded_ingest(kind);
    ingests += t.ingests;
    out.elapsed += t.elapsed;
    out.rows += t.rows;
    out.source_file_bytes += t.source_file_bytes;
  }
  if (ingests == 0) return std::nullopt;
  return out;
}

std::unique_ptr<Backend> make_backend(const BackendDescriptor& descriptor) {
  if (descriptor.type == "embedded") return std::make_unique<EmbeddedBackend>(descriptor);
  if (auto http = make_http_backend(descriptor)) return http;
  fail(Errc::unsupported, "backend '" + descriptor.id + "' of type " + descriptor.type +
                              ": query assets ship for this type, but no client adapter is built");
}

}  // namespace tickbench::backends
