#include "tickbench/engine.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <shared_mutex>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>
#include <unistd.h>

#include "column_store.hpp"
#include "io.hpp"
#include "tickbench/csv.hpp"
#include "tickbench/error.hpp"

namespace tickbench {

namespace fs = std::filesystem;
using json = nlohmann::json;
using store::ColumnDef;
using store::ColumnReader;
using store::ColumnWriter;
using store::Encoding;

namespace {

constexpr std::size_t kChunkRows = 64 * 1024;
constexpr std::size_t kRejectSamples = 20;
constexpr int kManifestFormat = 1;

constexpr std::size_t kTimestampCol = 0;
constexpr std::size_t kExchangeCol = 1;
constexpr std::size_t kSymbolCol = 2;
constexpr std::size_t kTradeSideCol = 3;
constexpr std::size_t kTradePriceCol = 4;
constexpr std::size_t kTradeAmountCol = 5;

std::string table_dir_name(TableKind kind) { return kind == TableKind::Trades ? "trades" : "books"; }

std::vector<Date> days_of(const TimeRange& range) {
  std::vector<Date> days;
  const Date last = day_of(range.end - Duration{1});
  for (Date d = day_of(range.begin); d <= last; d += std::chrono::days{1}) days.push_back(d);
  return days;
}

struct PartitionMeta {
  Date date;
  std::uint64_t rows = 0;
  std::vector<Encoding> encodings;  // parallel to table_columns(kind)
};

struct IngestRecord {
  std::string source;
  std::uint64_t source_file_bytes = 0;
  std::uint64_t rows = 0;
  std::uint64_t rejected = 0;
  std::int64_t elapsed_ns = 0;
};

struct TableState {
  std::vector<PartitionMeta> partitions;  // date order
  std::vector<IngestRecord> ingests;
};

/// Tracks the high-water mark of scratch memory attributed to one query.
class ScratchMeter {
 public:
  void add(std::size_t bytes) {
    current_ += bytes;
    peak_ = std::max(peak_, current_);
  }
  void release(std::size_t bytes) { current_ -= std::min(current_, bytes); }
  std::uint64_t peak() const { return peak_; }

 private:
  std::uint64_t current_ = 0;
  std::uint64_t peak_ = 0;
};

std::size_t snapshot_bytes(const BookSnapshot& b) {
  return sizeof(BookSnapshot) + (b.bids.capacity() + b.asks.capacity()) * sizeof(BookLevel);
}

// ---------------------------------------------------------------------------
// Partition writing

/// Builds one day partition in a temporary directory.
class PartitionBuilder {
 public:
  PartitionBuilder(TableKind kind, Date date, fs::path dir, const CompressionPolicy& policy, bool sync)
      : kind_(kind), date_(date), dir_(std::move(dir)), sync_(sync) {
    fs::create_directories(dir_);
    const auto& cols = store::table_columns(kind);
    for (const auto& c : cols) {
      const Encoding enc = policy.applies(c.name) ? Encoding::Delta : Encoding::Plain;
      encodings_.push_back(enc);
      writers_.push_back(std::make_unique<ColumnWriter>(dir_ / (c.name + ".bin"), c.type, enc, sync));
    }
    dictionaries_.resize(cols.size());
  }

  Date date() const { return date_; }
  const fs::path& dir() const { return dir_; }
  std::uint64_t rows() const { return timestamps_.size(); }
  const std::vector<Encoding>& encodings() const { return encodings_; }

  void add(const Trade& t) {
    begin_row(t.timestamp);
    put(kExchangeCol, code(kExchangeCol, t.exchange));
    put(kSymbolCol, code(kSymbolCol, t.symbol));
    put(kTradeSideCol, t.side == Side::Buy ? 0 : 1);
    put(kTradePriceCol, t.price.raw());
    put(kTradeAmountCol, t.amount.raw());
  }

  void add(const BookSnapshot& b) {
    begin_row(b.timestamp);
    put(kExchangeCol, code(kExchangeCol, b.exchange));
    put(kSymbolCol, code(kSymbolCol, b.symbol));
    std::size_t col = 3;
    for (const auto* levels : {&b.bids, &b.asks}) {
      for (std::size_t k = 0; k < static_cast<std::size_t>(kBookDepth); ++k) {
        const bool present = k < levels->size();
        put(col++, present ? (*levels)[k].price.raw() : 0);
        put(col++, present ? (*levels)[k].size.raw() : 0);
      }
    }
  }

  /// Closes all column files, restoring timestamp order if the input was not
  /// sorted, and writes the dictionaries.
  void finish() {
    for (auto& w : writers_) w->close();
    if (!sorted_) reorder();
    const auto& cols = store::table_columns(kind_);
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (cols[i].dictionary) store::write_dictionary(dir_ / (cols[i].name + ".dict"), dictionaries_[i].entries, sync_);
    }
    if (sync_) io::sync_directory(dir_);
  }

 private:
  struct Dictionary {
    std::unordered_map<std::string, std::uint32_t> codes;
    std::vector<std::string> entries;
  };

  void begin_row(Timestamp ts) {
    const std::int64_t v = ts.time_since_epoch().count();
    if (!timestamps_.empty() && v < timestamps_.back()) sorted_ = false;
    timestamps_.push_back(v);
    put(kTimestampCol, v);
  }

  void put(std::size_t col, std::int64_t v) { writers_[col]->append(v); }

  std::int64_t code(std::size_t col, const std::string& value) {
    auto& d = dictionaries_[col];
    auto [it, inserted] = d.codes.try_emplace(value, static_cast<std::uint32_t>(d.entries.size()));
    if (inserted) d.entries.push_back(value);
    return it->second;
  }

  void reorder() {
    std::vector<std::uint32_t> order(timestamps_.size());
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return timestamps_[a] < timestamps_[b]; });
    const auto& cols = store::table_columns(kind_);
    std::vector<std::int64_t> values(timestamps_.size());
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const fs::path path = dir_ / (cols[i].name + ".bin");
      {
        ColumnReader reader(path, cols[i].type, encodings_[i], values.size());
        std::size_t got = 0;
        while (got < values.size()) got += reader.read(values.data() + got, values.size() - got);
      }
      ColumnWriter writer(path, cols[i].type, encodings_[i], sync_);
      for (const std::uint32_t r : order) writer.append(values[r]);
      writer.close();
    }
  }

  TableKind kind_;
  Date date_;
  fs::path dir_;
  bool sync_;
  std::vector<Encoding> encodings_;
  std::vector<std::unique_ptr<ColumnWriter>> writers_;
  std::vector<Dictionary> dictionaries_;
  std::vector<std::int64_t> timestamps_;
  bool sorted_ = true;
};

/// Removes temporary partition directories unless released.
class TempDirs {
 public:
  ~TempDirs() {
    for (const auto& d : dirs_) {
      std::error_code ec;
      fs::remove_all(d, ec);
    }
  }
  void add(const fs::path& p) { dirs_.push_back(p); }
  void release() { dirs_.clear(); }

 private:
  std::vector<fs::path> dirs_;
};

// ---------------------------------------------------------------------------
// Partition reading

/// Chunked reader over a subset of one partition's columns.
class PartitionScan {
 public:
  PartitionScan(const fs::path& dir, TableKind kind, const PartitionMeta& meta, std::vector<std::size_t> columns)
      : columns_(std::move(columns)), values_(store::table_columns(kind).size()) {
    const auto& defs = store::table_columns(kind);
    for (const std::size_t c : columns_) {
      readers_.emplace_back(dir / (defs[c].name + ".bin"), defs[c].type, meta.encodings.at(c), meta.rows);
      values_[c].resize(kChunkRows);
    }
  }

  /// Fills the next chunk; returns its length (0 at the end).
  std::size_t next() {
    std::size_t n = 0;
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      const std::size_t got = readers_[i].read(values_[columns_[i]].data(), kChunkRows);
      if (i == 0) n = got;
    }
    return n;
  }

  std::int64_t at(std::size_t column, std::size_t row) const { return values_[column][row]; }
  std::size_t buffer_bytes() const { return columns_.size() * kChunkRows * sizeof(std::int64_t); }

 private:
  std::vector<std::size_t> columns_;
  std::vector<ColumnReader> readers_;
  std::vector<std::vector<std::int64_t>> values_;
};

struct Dictionaries {
  std::vector<std::string> exchange;
  std::vector<std::string> symbol;

  static Dictionaries load(const fs::path& dir) {
    return {store::read_dictionary(dir / "exchange.dict"), store::read_dictionary(dir / "symbol.dict")};
  }

  /// Code for `symbol`, -1 when the partition has no such symbol, -2 for "*".
  std::int64_t symbol_code(std::string_view wanted) const {
    if (wanted == kAllSymbols) return -2;
    for (std::size_t i = 0; i < symbol.size(); ++i) {
      if (symbol[i] == wanted) return static_cast<std::int64_t>(i);
    }
    return -1;
  }
};

/// What a book query needs materialized.
struct BookColumns {
  bool exchange = false;
  int bid_levels = 0;
  int ask_levels = 0;
};

}  // namespace

// ---------------------------------------------------------------------------

bool CompressionPolicy::applies(std::string_view column) const {
  return all || std::find(columns.begin(), columns.end(), column) != columns.end();
}

CompressionPolicy CompressionPolicy::parse(std::string_view text) {
  CompressionPolicy p;
  if (text.empty() || text == "none") return p;
  if (text == "all") {
    p.all = true;
    return p;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    const std::string name(text.substr(start, comma - start));
    bool known = false;
    for (const TableKind kind : {TableKind::Trades, TableKind::Books}) {
      for (const auto& c : store::table_columns(kind)) known = known || c.name == name;
    }
    if (!known) fail(Errc::config, "compression: unknown column '" + name + "'");
    p.columns.push_back(name);
    start = comma + 1;
  }
  return p;
}

StorageReport make_storage_report(std::uint64_t data_bytes, std::uint64_t source_file_bytes) {
  if (source_file_bytes == 0) fail(Errc::invalid_argument, "storage report: source file size is zero");
  StorageReport r;
  r.data_bytes_on_disk = data_bytes;
  r.source_file_bytes = source_file_bytes;
  r.efficiency_percent = 100.0 * static_cast<double>(data_bytes) / static_cast<double>(source_file_bytes);
  return r;
}

struct Engine::Impl {
  fs::path root;
  EngineOptions options;
  mutable std::shared_mutex state_mutex;
  std::mutex writer_mutex[2];
  TableState tables[2];

  fs::path manifest_path() const { return root / "manifest.json"; }
  fs::path table_dir(TableKind kind) const { return root / table_dir_name(kind); }
  fs::path partition_dir(TableKind kind, Date d) const { return table_dir(kind) / format_date(d); }
  TableState& state(TableKind kind) { return tables[static_cast<int>(kind)]; }
  const TableState& state(TableKind kind) const { return tables[static_cast<int>(kind)]; }

  void load_manifest();
  void save_manifest() const;
  TableState snapshot(TableKind kind) const {
    std::shared_lock lock(state_mutex);
    return state(kind);
  }

  IngestReport ingest(const fs::path& path, TableKind kind);

  std::vector<Trade> read_trades(const TimeRange& range, std::string_view symbol, bool with_exchange,
                                 ScratchMeter* meter) const;
  std::vector<BookSnapshot> read_books(const TimeRange& range, std::string_view symbol, const BookColumns& need,
                                       ScratchMeter* meter) const;
};

void Engine::Impl::load_manifest() {
  const fs::path path = manifest_path();
  if (!fs::exists(path)) return;
  json doc;
  try {
    std::ifstream in(path);
    doc = json::parse(in);
  } catch (const json::exception& e) {
    fail(Errc::invalid_data, path.string() + ": " + e.what());
  }
  if (doc.value("format", 0) != kManifestFormat) fail(Errc::invalid_data, path.string() + ": unsupported manifest format");
  for (const TableKind kind : {TableKind::Trades, TableKind::Books}) {
    const std::string name = table_dir_name(kind);
    if (!doc["tables"].contains(name)) continue;
    const json& t = doc["tables"][name];
    TableState& st = state(kind);
    const auto& cols = store::table_columns(kind);
    for (const auto& p : t.at("partitions")) {
      PartitionMeta meta;
      meta.date = parse_date(p.at("date").get<std::string>());
      meta.rows = p.at("rows").get<std::uint64_t>();
      const json& enc = p.at("encodings");
      for (const auto& c : cols) meta.encodings.push_back(store::parse_encoding(enc.at(c.name).get<std::string>()));
      st.partitions.push_back(std::move(meta));
    }
    for (const auto& i : t.at("ingests")) {
      st.ingests.push_back({i.at("source").get<std::string>(), i.at("source_file_bytes").get<std::uint64_t>(),
                            i.at("rows").get<std::uint64_t>(), i.at("rejected").get<std::uint64_t>(),
                            i.at("elapsed_ns").get<std::int64_t>()});
    }
  }
}

void Engine::Impl::save_manifest() const {
  json doc;
  doc["format"] = kManifestFormat;
  doc["tables"] = json::object();
  for (const TableKind kind : {TableKind::Trades, TableKind::Books}) {
    const TableState& st = state(kind);
    const auto& cols = store::table_columns(kind);
    json parts = json::array();
    for (const auto& p : st.partitions) {
      json enc = json::object();
      for (std::size_t i = 0; i < cols.size(); ++i) enc[cols[i].name] = std::string(store::to_string(p.encodings[i]));
      parts.push_back({{"date", format_date(p.date)}, {"rows", p.rows}, {"encodings", enc}});
    }
    json ingests = json::array();
    for (const auto& i : st.ingests) {
      ingests.push_back({{"source", i.source},
                         {"source_file_bytes", i.source_file_bytes},
                         {"rows", i.rows},
                         {"rejected", i.rejected},
                         {"elapsed_ns", i.elapsed_ns}});
    }
    doc["tables"][table_dir_name(kind)] = {{"partitions", parts}, {"ingests", ingests}};
  }
  const fs::path tmp = root / "manifest.json.tmp";
  const std::string text = doc.dump(1) + "\n";
  io::FileWriter out(tmp, options.sync);
  out.write(text.data(), text.size());
  out.close();
  fs::rename(tmp, manifest_path());
  if (options.sync) io::sync_directory(root);
}

IngestReport Engine::Impl::ingest(const fs::path& path, TableKind kind) {
  const auto started = std::chrono::steady_clock::now();
  std::lock_guard writer(writer_mutex[static_cast<int>(kind)]);

  IngestReport report;
  report.table = kind;
  if (!fs::exists(path)) fail(Errc::not_found, path.string() + ": no such file");
  report.source_file_bytes = fs::file_size(path);

  io::LineReader reader(path);
  std::string_view line;
  if (!reader.next(line)) fail(Errc::invalid_data, path.string() + ": line 1: missing header");
  if (line != csv::header(kind)) {
    fail(Errc::invalid_data, path.string() + ": line 1: header does not match the " + table_dir_name(kind) + " schema");
  }

  const fs::path tdir = table_dir(kind);
  fs::create_directories(tdir);
  TempDirs temps;
  std::map<Date, std::unique_ptr<PartitionBuilder>> builders;
  auto builder_for = [&](Timestamp ts) -> PartitionBuilder& {
    const Date d = day_of(ts);
    auto it = builders.find(d);
    if (it == builders.end()) {
      const fs::path dir = tdir / (".tmp-" + format_date(d) + "-" + std::to_string(::getpid()));
      fs::remove_all(dir);
      temps.add(dir);
      it = builders.emplace(d, std::make_unique<PartitionBuilder>(kind, d, dir, options.compression, options.sync)).first;
    }
    return *it->second;
  };
  auto reject = [&](const std::string& why) {
    ++report.rejected;
    if (report.reject_samples.size() < kRejectSamples) {
      report.reject_samples.push_back("line " + std::to_string(reader.line_number()) + ": " + why);
    }
  };

  while (reader.next(line)) {
    if (line.empty()) continue;
    try {
      if (kind == TableKind::Trades) {
        const Trade t = csv::parse_trade_row(line);
        if (auto bad = check_trade(t)) {
          reject(*bad);
          continue;
        }
        builder_for(t.timestamp).add(t);
      } else {
        const csv::ParsedBook parsed = csv::parse_book_row(line);
        if (parsed.violation) {
          reject(*parsed.violation);
          continue;
        }
        if (auto bad = check_snapshot(parsed.book)) {
          reject(*bad);
          continue;
        }
        builder_for(parsed.book.timestamp).add(parsed.book);
      }
    } catch (const Error& e) {
      if (e.code() != Errc::invalid_data) throw;
      fail(Errc::invalid_data, path.string() + ": line " + std::to_string(reader.line_number()) + ": " + e.what());
    }
    ++report.rows;
  }

  for (auto& [date, b] : builders) b->finish();

  {
    std::unique_lock lock(state_mutex);
    TableState& st = state(kind);
    std::vector<std::string> clashes;
    for (const auto& [date, b] : builders) {
      for (const auto& p : st.partitions) {
        if (p.date == date) clashes.push_back(format_date(date));
      }
    }
    if (!clashes.empty()) {
      std::string msg = table_dir_name(kind) + ": partition already stored for";
      for (const auto& c : clashes) msg += " " + c;
      fail(Errc::already_exists, msg);
    }
    for (auto& [date, b] : builders) {
      const fs::path final_dir = partition_dir(kind, date);
      fs::remove_all(final_dir);
      fs::rename(b->dir(), final_dir);
      st.partitions.push_back({date, b->rows(), b->encodings()});
      report.partitions.push_back(date);
    }
    temps.release();
    std::sort(st.partitions.begin(), st.partitions.end(),
              [](const PartitionMeta& a, const PartitionMeta& b) { return a.date < b.date; });
    if (options.sync) io::sync_directory(tdir);
    report.elapsed = std::chrono::duration_cast<Duration>(std::chrono::steady_clock::now() - started);
    st.ingests.push_back({fs::absolute(path).string(), report.source_file_bytes, report.rows, report.rejected,
                          report.elapsed.count()});
    save_manifest();
  }
  report.elapsed = std::chrono::duration_cast<Duration>(std::chrono::steady_clock::now() - started);
  return report;
}

std::vector<Trade> Engine::Impl::read_trades(const TimeRange& range, std::string_view symbol, bool with_exchange,
                                             ScratchMeter* meter) const {
  const TableState st = snapshot(TableKind::Trades);
  const std::int64_t lo = range.begin.time_since_epoch().count();
  const std::int64_t hi = range.end.time_since_epoch().count();
  std::vector<Trade> out;
  std::size_t accounted = 0;
  for (const auto& p : st.partitions) {
    if (p.date < day_of(range.begin) || p.date > day_of(range.end - Duration{1})) continue;
    const fs::path dir = partition_dir(TableKind::Trades, p.date);
    const Dictionaries dict = Dictionaries::load(dir);
    const std::int64_t want = dict.symbol_code(symbol);
    if (want == -1) continue;
    std::vector<std::size_t> cols{kTimestampCol, kSymbolCol, kTradeSideCol, kTradePriceCol, kTradeAmountCol};
    if (with_exchange) cols.push_back(kExchangeCol);
    PartitionScan scan(dir, TableKind::Trades, p, cols);
    if (meter) meter->add(scan.buffer_bytes());
    while (const std::size_t n = scan.next()) {
      for (std::size_t r = 0; r < n; ++r) {
        const std::int64_t ts = scan.at(kTimestampCol, r);
        if (ts < lo || ts >= hi) continue;
        const std::int64_t sym = scan.at(kSymbolCol, r);
        if (want >= 0 && sym != want) continue;
        Trade t;
        t.timestamp = Timestamp{Duration{ts}};
        if (with_exchange) t.exchange = dict.exchange.at(static_cast<std::size_t>(scan.at(kExchangeCol, r)));
        t.symbol = dict.symbol.at(static_cast<std::size_t>(sym));
        t.side = scan.at(kTradeSideCol, r) == 0 ? Side::Buy : Side::Sell;
        t.price = Decimal::from_raw(scan.at(kTradePriceCol, r));
        t.amount = Decimal::from_raw(scan.at(kTradeAmountCol, r));
        out.push_back(std::move(t));
      }
      if (meter) {
        const std::size_t now = out.capacity() * sizeof(Trade);
        meter->add(now - std::min(now, accounted));
        accounted = std::max(now, accounted);
      }
    }
    if (meter) meter->release(scan.buffer_bytes());
  }
  return out;
}

std::vector<BookSnapshot> Engine::Impl::read_books(const TimeRange& range, std::string_view symbol,
                                                   const BookColumns& need, ScratchMeter* meter) const {
  const TableState st = snapshot(TableKind::Books);
  const std::int64_t lo = range.begin.time_since_epoch().count();
  const std::int64_t hi = range.end.time_since_epoch().count();
  std::vector<BookSnapshot> out;
  std::size_t accounted = 0;
  for (const auto& p : st.partitions) {
    if (p.date < day_of(range.begin) || p.date > day_of(range.end - Duration{1})) continue;
    const fs::path dir = partition_dir(TableKind::Books, p.date);
    const Dictionaries dict = Dictionaries::load(dir);
    const std::int64_t want = dict.symbol_code(symbol);
    if (want == -1) continue;
    std::vector<std::size_t> cols{kTimestampCol, kSymbolCol};
    if (need.exchange) cols.push_back(kExchangeCol);
    for (int level = 1; level <= need.bid_levels; ++level) {
      cols.push_back(store::book_price_column(0, level));
      cols.push_back(store::book_size_column(0, level));
    }
    for (int level = 1; level <= need.ask_levels; ++level) {
      cols.push_back(store::book_price_column(1, level));
      cols.push_back(store::book_size_column(1, level));
    }
    PartitionScan scan(dir, TableKind::Books, p, cols);
    if (meter) meter->add(scan.buffer_bytes());
    std::size_t level_bytes = 0;
    while (const std::size_t n = scan.next()) {
      for (std::size_t r = 0; r < n; ++r) {
        const std::int64_t ts = scan.at(kTimestampCol, r);
        if (ts < lo || ts >= hi) continue;
        const std::int64_t sym = scan.at(kSymbolCol, r);
        if (want >= 0 && sym != want) continue;
        BookSnapshot b;
        b.timestamp = Timestamp{Duration{ts}};
        if (need.exchange) b.exchange = dict.exchange.at(static_cast<std::size_t>(scan.at(kExchangeCol, r)));
        b.symbol = dict.symbol.at(static_cast<std::size_t>(sym));
        for (int side = 0; side < 2; ++side) {
          auto& levels = side == 0 ? b.bids : b.asks;
          const int depth = side == 0 ? need.bid_levels : need.ask_levels;
          for (int level = 1; level <= depth; ++level) {
            const std::int64_t price = scan.at(store::book_price_column(side, level), r);
            if (price == 0) break;
            levels.push_back({Decimal::from_raw(price),
                              Decimal::from_raw(scan.at(store::book_size_column(side, level), r))});
          }
        }
        level_bytes += snapshot_bytes(b) - sizeof(BookSnapshot);
        out.push_back(std::move(b));
      }
      if (meter) {
        const std::size_t now = out.capacity() * sizeof(BookSnapshot) + level_bytes;
        meter->add(now - std::min(now, accounted));
        accounted = std::max(now, accounted);
      }
    }
    if (meter) meter->release(scan.buffer_bytes());
  }
  return out;
}

// ---------------------------------------------------------------------------

Engine::Engine(const fs::path& root, EngineOptions options) : impl_(std::make_unique<Impl>()) {
  impl_->root = root;
  impl_->options = std::move(options);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) fail(Errc::io, "cannot create store directory " + root.string() + ": " + ec.message());
  impl_->load_manifest();
}

Engine::~Engine() = default;

const fs::path& Engine::root() const { return impl_->root; }

IngestReport Engine::ingest_csv(const fs::path& path, TableKind kind) { return impl_->ingest(path, kind); }

IngestReport Engine::ingest_csv(const fs::path& path) {
  if (!fs::exists(path)) fail(Errc::not_found, path.string() + ": no such file");
  return impl_->ingest(path, csv::detect_table(path));
}

std::uint64_t Engine::export_csv(TableKind kind, const TimeRange& range, const fs::path& path) const {
  csv::Writer writer(path, kind);
  if (kind == TableKind::Trades) {
    for (const auto& t : impl_->read_trades(range, kAllSymbols, true, nullptr)) writer.write(t);
  } else {
    // One partition at a time keeps memory bounded by a single day.
    for (const auto& p : impl_->snapshot(kind).partitions) {
      const Timestamp day_begin{p.date.time_since_epoch()};
      const TimeRange day{std::max(range.begin, day_begin), std::min(range.end, day_begin + kDay)};
      if (!(day.begin < day.end)) continue;
      for (const auto& b : impl_->read_books(day, kAllSymbols, {true, kBookDepth, kBookDepth}, nullptr)) writer.write(b);
    }
  }
  const std::uint64_t rows = writer.rows();
  writer.close();
  return rows;
}

std::uint64_t Engine::export_csv(TableKind kind, const fs::path& path) const {
  const auto parts = partitions(kind);
  if (parts.empty()) {
    csv::Writer writer(path, kind);
    writer.close();
    return 0;
  }
  const Timestamp begin{parts.front().date.time_since_epoch()};
  const Timestamp end{parts.back().date.time_since_epoch() + kDay};
  return export_csv(kind, TimeRange::make(begin, end), path);
}

std::uint64_t Engine::data_bytes(TableKind kind) const {
  std::shared_lock lock(impl_->state_mutex);
  std::uint64_t total = 0;
  for (const auto& p : impl_->state(kind).partitions) {
    for (const auto& entry : fs::directory_iterator(impl_->partition_dir(kind, p.date))) {
      if (entry.is_regular_file()) total += entry.file_size();
    }
  }
  if (fs::exists(impl_->manifest_path())) total += fs::file_size(impl_->manifest_path());
  return total;
}

StorageReport Engine::storage_report(TableKind kind, std::uint64_t source_file_bytes) const {
  if (source_file_bytes == 0) fail(Errc::invalid_argument, "storage report: source file size is zero");
  return make_storage_report(data_bytes(kind), source_file_bytes);
}

IngestTotals Engine::recorded_ingest(TableKind kind) const {
  std::shared_lock lock(impl_->state_mutex);
  IngestTotals t;
  for (const auto& i : impl_->state(kind).ingests) {
    ++t.ingests;
    t.rows += i.rows;
    t.source_file_bytes += i.source_file_bytes;
    t.elapsed += Duration{i.elapsed_ns};
  }
  return t;
}

std::vector<PartitionInfo> Engine::partitions(TableKind kind) const {
  std::vector<PartitionInfo> out;
  for (const auto& p : impl_->snapshot(kind).partitions) out.push_back({p.date, p.rows});
  return out;
}

std::uint64_t Engine::row_count(TableKind kind) const {
  std::uint64_t n = 0;
  for (const auto& p : partitions(kind)) n += p.rows;
  return n;
}

bool Engine::empty(TableKind kind) const { return impl_->snapshot(kind).partitions.empty(); }

std::vector<Trade> Engine::load_trades(const TimeRange& range) const {
  return impl_->read_trades(range, kAllSymbols, true, nullptr);
}

std::vector<BookSnapshot> Engine::load_books(const TimeRange& range) const {
  return impl_->read_books(range, kAllSymbols, {true, kBookDepth, kBookDepth}, nullptr);
}

ExecuteResult Engine::execute(const BenchmarkSpec& spec, const analytics::RunOptions& options) const {
  validate(spec);
  if (!is_read_benchmark(spec.id)) fail(Errc::invalid_argument, std::string(to_string(spec.id)) + " is not a read benchmark");
  const auto started = std::chrono::steady_clock::now();

  {
    std::shared_lock lock(impl_->state_mutex);
    const auto wanted = days_of(spec.range);
    bool any = false;
    for (const TableKind kind : {TableKind::Trades, TableKind::Books}) {
      for (const auto& p : impl_->state(kind).partitions) {
        any = any || std::find(wanted.begin(), wanted.end(), p.date) != wanted.end();
      }
    }
    if (!any) {
      std::string msg = std::string(to_string(spec.id)) + ": no stored partition for";
      for (const Date d : wanted) msg += " " + format_date(d);
      fail(Errc::not_found, msg);
    }
  }

  ScratchMeter meter;
  ExecuteResult result;
  const std::span<const Trade> no_trades;
  const std::span<const BookSnapshot> no_books;

  switch (spec.id) {
    case BenchmarkId::TV1:
    case BenchmarkId::TV2:
    case BenchmarkId::TVWAP:
    case BenchmarkId::CVT: {
      const auto trades = impl_->read_trades(spec.range, spec.symbol, false, &meter);
      result.table = analytics::run_benchmark(spec, trades, no_books, options);
      break;
    }
    case BenchmarkId::OB1:
    case BenchmarkId::OB2: {
      // Streaming maximum over the level-1 bid column.
      const TableState st = impl_->snapshot(TableKind::Books);
      const std::int64_t lo = spec.range.begin.time_since_epoch().count();
      const std::int64_t hi = spec.range.end.time_since_epoch().count();
      const std::size_t bid_col = store::book_price_column(0, 1);
      std::int64_t best = 0;
      for (const auto& p : st.partitions) {
        if (p.date < day_of(spec.range.begin) || p.date > day_of(spec.range.end - Duration{1})) continue;
        const fs::path dir = impl_->partition_dir(TableKind::Books, p.date);
        const std::int64_t want = Dictionaries::load(dir).symbol_code(spec.symbol);
        if (want == -1) continue;
        PartitionScan scan(dir, TableKind::Books, p, {kTimestampCol, kSymbolCol, bid_col});
        meter.add(scan.buffer_bytes());
        while (const std::size_t n = scan.next()) {
          for (std::size_t r = 0; r < n; ++r) {
            const std::int64_t ts = scan.at(kTimestampCol, r);
            if (ts < lo || ts >= hi) continue;
            if (want >= 0 && scan.at(kSymbolCol, r) != want) continue;
            best = std::max(best, scan.at(bid_col, r));
          }
        }
        meter.release(scan.buffer_bytes());
      }
      if (best == 0) fail(Errc::not_found, "highest bid: no bids for " + spec.symbol + " in range");
      result.table = analytics::highest_bid_table(Decimal::from_raw(best));
      break;
    }
    case BenchmarkId::OT: {
      // Latest snapshot at or before the drawn instant, searching back from
      // its day through earlier partitions.
      const Timestamp at = options.top_of_book_at.value_or(draw_random_at(spec));
      const TableState st = impl_->snapshot(TableKind::Books);
      for (auto it = st.partitions.rbegin(); it != st.partitions.rend(); ++it) {
        if (it->date > day_of(at)) continue;
        const Timestamp day_begin{it->date.time_since_epoch()};
        const TimeRange window{day_begin, std::min(day_begin + kDay, at + Duration{1})};
        const auto books = impl_->read_books(window, spec.symbol, {false, 1, 1}, &meter);
        if (!books.empty()) {
          result.table = analytics::to_table(analytics::top_of_book(books, spec.symbol, at));
          break;
        }
      }
      if (result.table.columns.empty()) {
        fail(Errc::not_found, "top of book: no " + spec.symbol + " snapshot at or before " + format_timestamp(at));
      }
      break;
    }
    case BenchmarkId::OV1:
    case BenchmarkId::OV2: {
      BookColumns need;
      (*spec.side == Side::Buy ? need.bid_levels : need.ask_levels) = spec.depth_level;
      const auto books = impl_->read_books(spec.range, spec.symbol, need, &meter);
      result.table = analytics::run_benchmark(spec, no_trades, books, options);
      break;
    }
    default: {
      const BookColumns need{spec.id == BenchmarkId::ONBBO, 1, 1};
      const auto books = impl_->read_books(spec.range, spec.symbol, need, &meter);
      result.table = analytics::run_benchmark(spec, no_trades, books, options);
      break;
    }
  }
  meter.add(result.table.footprint_bytes());
  result.server_elapsed = std::chrono::duration_cast<Duration>(std::chrono::steady_clock::now() - started);
  result.peak_query_bytes = meter.peak();
  return result;
}

}  // namespace tickbench
