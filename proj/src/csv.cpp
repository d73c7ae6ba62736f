#include "tickbench/csv.hpp"

#include <array>
#include <cerrno>
#include <cstring>

#include "io.hpp"
#include "tickbench/error.hpp"

namespace tickbench::csv {

namespace {

constexpr std::size_t kTradeFields = 6;
constexpr std::size_t kBookFields = 3 + 4 * kBookDepth;

std::string make_books_header() {
  std::string h = "timestamp,exchange,symbol";
  for (const char side : {'b', 'a'}) {
    for (int level = 1; level <= kBookDepth; ++level) {
      const std::string prefix = std::string(1, side) + std::to_string(level);
      h += "," + prefix + "price," + prefix + "size";
    }
  }
  return h;
}

Decimal field_decimal(std::string_view text, const char* name) {
  if (auto d = Decimal::try_parse(text)) return *d;
  fail(Errc::invalid_data, std::string(name) + ": malformed decimal '" + std::string(text) + "'");
}

Timestamp field_timestamp(std::string_view text) {
  if (auto ts = try_parse_timestamp(text)) return *ts;
  fail(Errc::invalid_data, "timestamp: malformed '" + std::string(text) + "'");
}

void require_identifier(std::string_view text, const char* name) {
  if (text.empty()) fail(Errc::invalid_data, std::string(name) + ": empty");
}

}  // namespace

const std::string& header(TableKind kind) {
  static const std::string trades = "timestamp,exchange,symbol,side,price,amount";
  static const std::string books = make_books_header();
  return kind == TableKind::Trades ? trades : books;
}

TableKind detect_table(const std::filesystem::path& path) {
  io::LineReader reader(path);
  std::string_view first;
  if (!reader.next(first)) fail(Errc::invalid_data, path.string() + ": empty file, expected a CSV header");
  if (first == header(TableKind::Trades)) return TableKind::Trades;
  if (first == header(TableKind::Books)) return TableKind::Books;
  fail(Errc::invalid_data, path.string() + ": line 1: header matches neither the trades nor the books schema");
}

void append_trade_row(std::string& out, const Trade& t) {
  append_timestamp(out, t.timestamp);
  out.push_back(',');
  out += t.exchange;
  out.push_back(',');
  out += t.symbol;
  out.push_back(',');
  out += to_string(t.side);
  out.push_back(',');
  t.price.append_to(out);
  out.push_back(',');
  t.amount.append_to(out);
  out.push_back('\n');
}

void append_book_row(std::string& out, const BookSnapshot& b) {
  append_timestamp(out, b.timestamp);
  out.push_back(',');
  out += b.exchange;
  out.push_back(',');
  out += b.symbol;
  for (const auto* levels : {&b.bids, &b.asks}) {
    for (std::size_t k = 0; k < static_cast<std::size_t>(kBookDepth); ++k) {
      out.push_back(',');
      if (k < levels->size()) (*levels)[k].price.append_to(out);
      out.push_back(',');
      if (k < levels->size()) (*levels)[k].size.append_to(out);
    }
  }
  out.push_back('\n');
}

Trade parse_trade_row(std::string_view line) {
  std::array<std::string_view, kTradeFields> f;
  const std::size_t n = io::split_fields(line, f.data(), f.size());
  if (n != kTradeFields) {
    fail(Errc::invalid_data, "expected 6 fields, found " + std::string(n > kTradeFields ? "more" : std::to_string(n)));
  }
  Trade t;
  t.timestamp = field_timestamp(f[0]);
  require_identifier(f[1], "exchange");
  require_identifier(f[2], "symbol");
  t.exchange = std::string(f[1]);
  t.symbol = std::string(f[2]);
  t.side = parse_side(f[3]);
  t.price = field_decimal(f[4], "price");
  t.amount = field_decimal(f[5], "amount");
  return t;
}

ParsedBook parse_book_row(std::string_view line) {
  std::array<std::string_view, kBookFields> f;
  const std::size_t n = io::split_fields(line, f.data(), f.size());
  if (n != kBookFields) {
    fail(Errc::invalid_data, "expected " + std::to_string(kBookFields) + " fields, found " + std::string(n > kBookFields ? "more" : std::to_string(n)));
  }
  ParsedBook parsed;
  BookSnapshot& b = parsed.book;
  b.timestamp = field_timestamp(f[0]);
  require_identifier(f[1], "exchange");
  require_identifier(f[2], "symbol");
  b.exchange = std::string(f[1]);
  b.symbol = std::string(f[2]);
  std::size_t pos = 3;
  for (auto* levels : {&b.bids, &b.asks}) {
    const char* side = levels == &b.bids ? "bid" : "ask";
    bool ended = false;
    for (int level = 1; level <= kBookDepth; ++level, pos += 2) {
      const std::string_view price = f[pos];
      const std::string_view size = f[pos + 1];
      if (price.empty() && size.empty()) {
        ended = true;
        continue;
      }
      const Decimal p = field_decimal(price.empty() ? std::string_view("0") : price, "price");
      const Decimal s = field_decimal(size.empty() ? std::string_view("0") : size, "size");
      if (price.empty() || size.empty()) {
        if (!parsed.violation) {
          parsed.violation = std::string(side) + " level " + std::to_string(level) + " has only one of price/size";
        }
        continue;
      }
      if (ended) {
        if (!parsed.violation) {
          parsed.violation = std::string(side) + " level " + std::to_string(level) + " follows an absent level";
        }
        continue;
      }
      levels->push_back({p, s});
    }
  }
  return parsed;
}

// ---------------------------------------------------------------------------

Writer::Writer(const std::filesystem::path& path, TableKind kind) : path_(path) {
  file_ = std::fopen(path.c_str(), "wb");
  if (file_ == nullptr) fail(Errc::io, "cannot create " + path.string() + ": " + std::strerror(errno));
  buffer_.reserve(1u << 20);
  buffer_ += header(kind);
  buffer_.push_back('\n');
}

Writer::~Writer() {
  if (file_ != nullptr) std::fclose(file_);
}

void Writer::flush_if_full() {
  if (buffer_.size() < (1u << 20)) return;
  if (std::fwrite(buffer_.data(), 1, buffer_.size(), file_) != buffer_.size()) {
    fail(Errc::io, "write error on " + path_.string());
  }
  bytes_ += buffer_.size();
  buffer_.clear();
}

void Writer::write(const Trade& trade) {
  append_trade_row(buffer_, trade);
  ++rows_;
  flush_if_full();
}

void Writer::write(const BookSnapshot& book) {
  append_book_row(buffer_, book);
  ++rows_;
  flush_if_full();
}

std::uint64_t Writer::close() {
  if (file_ == nullptr) return bytes_;
  bool ok = std::fwrite(buffer_.data(), 1, buffer_.size(), file_) == buffer_.size();
  bytes_ += buffer_.size();
  buffer_.clear();
  ok = (std::fclose(file_) == 0) && ok;
  file_ = nullptr;
  if (!ok) fail(Errc::io, "cannot finish " + path_.string());
  return bytes_;
}

}  // namespace tickbench::csv
