#include "http_adapters.hpp"

#include <chrono>
#include <fstream>
#include <map>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "io.hpp"
#include "tickbench/csv.hpp"
#include "tickbench/error.hpp"

namespace tickbench::backends {

namespace fs = std::filesystem;

namespace {

std::string unescape_tsv(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 == s.size()) {
      out.push_back(s[i]);
      continue;
    }
    switch (s[++i]) {
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      case '0': out.push_back('\0'); break;
      default: out.push_back(s[i]);
    }
  }
  return out;
}

std::vector<std::string> split_tsv(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    cells.push_back(unescape_tsv(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start)));
    if (tab == std::string_view::npos) return cells;
    start = tab + 1;
  }
}

/// RFC 4180 fields of one line.
std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  cells.push_back(std::move(cur));
  return cells;
}

std::vector<std::string_view> lines_of(std::string_view body) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start < body.size()) {
    std::size_t nl = body.find('\n', start);
    if (nl == std::string_view::npos) nl = body.size();
    std::string_view line = body.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    start = nl + 1;
  }
  return out;
}

void escape_tag(std::string& out, std::string_view v) {
  for (const char c : v) {
    if (c == ',' || c == '=' || c == ' ') out.push_back('\\');
    out.push_back(c);
  }
}

std::string http_error(const httplib::Result& r) { return httplib::to_string(r.error()); }

/// Shared plumbing for the two HTTP adapters.
class HttpBackend : public Backend {
 public:
  HttpBackend(BackendDescriptor d, std::string default_port)
      : Backend(std::move(d)), default_port_(std::move(default_port)) {
    const std::string host = descriptor().get("host", "localhost");
    const int port = std::stoi(descriptor().get("port", default_port_));
    client_ = std::make_unique<httplib::Client>(host, port);
    const int timeout = std::stoi(descriptor().get("timeout_s", "600"));
    client_->set_connection_timeout(5, 0);
    client_->set_read_timeout(timeout, 0);
    client_->set_write_timeout(timeout, 0);
  }

 protected:
  httplib::Client& client() { return *client_; }

  [[noreturn]] void unreachable(const httplib::Result& r) const {
    fail(Errc::connection, descriptor().id + ": cannot reach " + descriptor().get("host", "localhost") + ":" +
                               descriptor().get("port", default_port_) + " (" + http_error(r) + ")");
  }

 private:
  std::string default_port_;
  std::unique_ptr<httplib::Client> client_;
};

// ---------------------------------------------------------------------------

class ClickHouseBackend : public HttpBackend {
 public:
  explicit ClickHouseBackend(BackendDescriptor d) : HttpBackend(std::move(d), "8123") {}

  void connect() override {
    auto r = client().Get("/ping");
    if (!r) unreachable(r);
    if (r->status != 200) fail(Errc::connection, descriptor().id + ": ping returned HTTP " + std::to_string(r->status));
  }

  bool is_fresh() override {
    const RawResult r = execute("SELECT (SELECT count() FROM trades) + (SELECT count() FROM books) AS n");
    return !r.rows.empty() && r.rows[0].at(0) == "0";
  }

  IngestOutcome ingest(const std::vector<fs::path>& csv_paths) override {
    IngestOutcome out;
    for (const auto& path : csv_paths) {
      const TableKind kind = csv::detect_table(path);
      const std::uint64_t size = fs::file_size(path);
      auto file = std::make_shared<std::ifstream>(path, std::ios::binary);
      const std::string query = "INSERT INTO " + std::string(to_string(kind)) + " FORMAT CSVWithNames";
      const auto started = std::chrono::steady_clock::now();
      auto r = client().Post(
          target({{"query", query}, {"date_time_input_format", "best_effort"}}), headers(), size,
          [file](std::size_t, std::size_t length, httplib::DataSink& sink) {
            std::vector<char> buf(std::min<std::size_t>(length, 1u << 20));
            file->read(buf.data(), static_cast<std::streamsize>(buf.size()));
            sink.write(buf.data(), static_cast<std::size_t>(file->gcount()));
            return true;
          },
          "text/csv");
      if (!r) unreachable(r);
      if (r->status != 200) {
        fail(Errc::query, descriptor().id + ": ingest of " + path.string() + " failed after " + std::to_string(out.rows) +
                              " rows: " + r->body);
      }
      out.elapsed += std::chrono::duration_cast<Duration>(std::chrono::steady_clock::now() - started);
      out.source_file_bytes += size;
      out.rows += summary_value(*r, "written_rows").value_or(0);
    }
    return out;
  }

  RawResult execute(const std::string& query) override {
    auto r = client().Post(target({{"default_format", "TabSeparatedWithNames"}}), headers(), query, "text/plain");
    if (!r) unreachable(r);
    if (r->status != 200) fail(Errc::query, descriptor().id + ": " + r->body);
    RawResult raw = parse_tab_separated(r->body);
    if (auto ns = summary_value(*r, "elapsed_ns")) raw.server_elapsed = Duration{static_cast<std::int64_t>(*ns)};
    return raw;
  }

  std::uint64_t data_bytes() override {
    const RawResult r = execute(
        "SELECT sum(bytes_on_disk) AS bytes FROM system.parts WHERE active AND database = currentDatabase() "
        "AND table IN ('trades', 'books')");
    if (r.rows.empty()) return 0;
    return std::stoull(r.rows[0].at(0));
  }

 private:
  std::string target(const std::map<std::string, std::string>& params) {
    std::string t = "/?database=" + httplib::detail::encode_query_param(descriptor().get("database", "default"));
    for (const auto& [k, v] : params) t += "&" + k + "=" + httplib::detail::encode_query_param(v);
    return t;
  }

  httplib::Headers headers() const {
    return {{"X-ClickHouse-User", descriptor().get("user", "default")},
            {"X-ClickHouse-Key", descriptor().get("password", "")}};
  }

  static std::optional<std::uint64_t> summary_value(const httplib::Response& r, const char* key) {
    if (!r.has_header("X-ClickHouse-Summary")) return std::nullopt;
    const auto j = nlohmann::json::parse(r.get_header_value("X-ClickHouse-Summary"), nullptr, false);
    if (j.is_discarded() || !j.contains(key)) return std::nullopt;
    const auto& v = j[key];
    if (v.is_string()) return std::stoull(v.get<std::string>());
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    return std::nullopt;
  }
};

// ---------------------------------------------------------------------------

class InfluxBackend : public HttpBackend {
 public:
  explicit InfluxBackend(BackendDescriptor d) : HttpBackend(std::move(d), "8086") {}

  void connect() override {
    auto r = client().Get("/health");
    if (!r) unreachable(r);
    if (r->status != 200) fail(Errc::connection, descriptor().id + ": health returned HTTP " + std::to_string(r->status));
  }

  bool is_fresh() override {
    const RawResult r = execute("from(bucket: \"" + bucket() + "\") |> range(start: 0) |> limit(n: 1)");
    return r.rows.empty();
  }

  IngestOutcome ingest(const std::vector<fs::path>& csv_paths) override {
    IngestOutcome out;
    constexpr std::size_t kBatch = 5000;
    for (const auto& path : csv_paths) {
      const TableKind kind = csv::detect_table(path);
      const auto started = std::chrono::steady_clock::now();
      io::LineReader reader(path);
      std::string_view line;
      reader.next(line);
      std::string batch;
      std::size_t pending = 0;
      auto flush = [&] {
        if (pending == 0) return;
        auto r = client().Post("/api/v2/write?org=" + httplib::detail::encode_query_param(org()) +
                                   "&bucket=" + httplib::detail::encode_query_param(bucket()) + "&precision=ns",
                               auth(), batch, "text/plain; charset=utf-8");
        if (!r) unreachable(r);
        if (r->status != 204) {
          fail(Errc::query, descriptor().id + ": write failed after " + std::to_string(out.rows) + " rows: " + r->body);
        }
        out.rows += pending;
        batch.clear();
        pending = 0;
      };
      while (reader.next(line)) {
        if (line.empty()) continue;
        if (kind == TableKind::Trades) {
          append_line_protocol(batch, csv::parse_trade_row(line));
        } else {
          append_line_protocol(batch, csv::parse_book_row(line).book);
        }
        if (++pending == kBatch) flush();
      }
      flush();
      out.elapsed += std::chrono::duration_cast<Duration>(std::chrono::steady_clock::now() - started);
      out.source_file_bytes += fs::file_size(path);
    }
    return out;
  }

  RawResult execute(const std::string& query) override {
    httplib::Headers h = auth();
    h.emplace("Accept", "application/csv");
    auto r = client().Post("/api/v2/query?org=" + httplib::detail::encode_query_param(org()), h, query,
                           "application/vnd.flux");
    if (!r) unreachable(r);
    if (r->status != 200) fail(Errc::query, descriptor().id + ": " + r->body);
    return parse_annotated_csv(r->body);
  }

 private:
  std::string org() const { return descriptor().get("org", "tickbench"); }
  std::string bucket() const { return descriptor().get("bucket", "tickbench"); }
  httplib::Headers auth() const { return {{"Authorization", "Token " + descriptor().get("token", "")}}; }
};

}  // namespace

RawResult parse_tab_separated(std::string_view body) {
  RawResult raw;
  bool header = true;
  for (const std::string_view line : lines_of(body)) {
    if (line.empty()) continue;
    auto cells = split_tsv(line);
    if (header) {
      raw.columns = std::move(cells);
      header = false;
    } else {
      raw.rows.push_back(std::move(cells));
    }
  }
  return raw;
}

RawResult parse_annotated_csv(std::string_view body) {
  RawResult raw;
  std::map<std::string, std::size_t> index;
  std::vector<std::size_t> current;  // table column -> merged column, npos to drop
  bool expect_header = true;
  for (const std::string_view line : lines_of(body)) {
    if (line.empty()) {
      expect_header = true;
      continue;
    }
    if (line[0] == '#') {
      expect_header = true;
      continue;
    }
    auto cells = split_csv(line);
    if (expect_header) {
      current.clear();
      for (const auto& name : cells) {
        if (name.empty() || name == "result" || name == "table") {
          current.push_back(std::string::npos);
          continue;
        }
        auto [it, inserted] = index.try_emplace(name, raw.columns.size());
        if (inserted) {
          raw.columns.push_back(name);
          for (auto& row : raw.rows) row.emplace_back();
        }
        current.push_back(it->second);
      }
      expect_header = false;
      continue;
    }
    std::vector<std::string> row(raw.columns.size());
    for (std::size_t i = 0; i < cells.size() && i < current.size(); ++i) {
      if (current[i] != std::string::npos) row[current[i]] = std::move(cells[i]);
    }
    raw.rows.push_back(std::move(row));
  }
  return raw;
}

void append_line_protocol(std::string& out, const Trade& t) {
  out += "trades,exchange=";
  escape_tag(out, t.exchange);
  out += ",symbol=";
  escape_tag(out, t.symbol);
  out += ",side=";
  out += to_string(t.side);
  out += " price=";
  t.price.append_to(out);
  out += ",amount=";
  t.amount.append_to(out);
  out.push_back(' ');
  out += std::to_string(t.timestamp.time_since_epoch().count());
  out.push_back('\n');
}

void append_line_protocol(std::string& out, const BookSnapshot& b) {
  out += "books,exchange=";
  escape_tag(out, b.exchange);
  out += ",symbol=";
  escape_tag(out, b.symbol);
  char sep = ' ';
  for (const auto* levels : {&b.bids, &b.asks}) {
    const char side = levels == &b.bids ? 'b' : 'a';
    for (std::size_t k = 0; k < levels->size(); ++k) {
      const std::string prefix = std::string(1, side) + std::to_string(k + 1);
      out.push_back(sep);
      sep = ',';
      out += prefix + "price=";
      (*levels)[k].price.append_to(out);
      out += "," + prefix + "size=";
      (*levels)[k].size.append_to(out);
    }
  }
  if (sep == ' ') out += " empty=true";
  out.push_back(' ');
  out += std::to_string(b.timestamp.time_since_epoch().count());
  out.push_back('\n');
}

std::unique_ptr<Backend> make_http_backend(const BackendDescriptor& descriptor) {
  if (descriptor.type == "clickhouse") return std::make_unique<ClickHouseBackend>(descriptor);
  if (descriptor.type == "influxdb") return std::make_unique<InfluxBackend>(descriptor);
  return nullptr;
}

}  // namespace tickbench::backends
