#include "column_store.hpp"

#include <unistd.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <utility>

#include "tickbench/error.hpp"

namespace tickbench::store {

static_assert(std::endian::native == std::endian::little, "column files are little-endian");

namespace {

constexpr std::size_t kWriteBuffer = 64u << 10;
constexpr std::size_t kReadBuffer = 256u << 10;

std::size_t width_of(ValueType type) {
  switch (type) {
    case ValueType::I64: return 8;
    case ValueType::U32: return 4;
    case ValueType::U8: return 1;
  }
  return 8;
}

std::uint64_t zigzag(std::int64_t v) {
  return (static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63);
}

std::int64_t unzigzag(std::uint64_t v) {
  return static_cast<std::int64_t>(v >> 1) ^ -static_cast<std::int64_t>(v & 1);
}

std::vector<ColumnDef> make_trade_columns() {
  return {{"timestamp", ValueType::I64}, {"exchange", ValueType::U32, true}, {"symbol", ValueType::U32, true},
          {"side", ValueType::U8},       {"price", ValueType::I64},          {"amount", ValueType::I64}};
}

std::vector<ColumnDef> make_book_columns() {
  std::vector<ColumnDef> cols{
      {"timestamp", ValueType::I64}, {"exchange", ValueType::U32, true}, {"symbol", ValueType::U32, true}};
  for (const char side : {'b', 'a'}) {
    for (int level = 1; level <= kBookDepth; ++level) {
      const std::string prefix = std::string(1, side) + std::to_string(level);
      cols.push_back({prefix + "price", ValueType::I64});
      cols.push_back({prefix + "size", ValueType::I64});
    }
  }
  return cols;
}

}  // namespace

std::string_view to_string(Encoding encoding) { return encoding == Encoding::Plain ? "plain" : "delta"; }

Encoding parse_encoding(std::string_view text) {
  if (text == "plain") return Encoding::Plain;
  if (text == "delta") return Encoding::Delta;
  fail(Errc::invalid_data, "unknown column encoding '" + std::string(text) + "'");
}

const std::vector<ColumnDef>& table_columns(TableKind kind) {
  static const std::vector<ColumnDef> trades = make_trade_columns();
  static const std::vector<ColumnDef> books = make_book_columns();
  return kind == TableKind::Trades ? trades : books;
}

std::size_t column_index(TableKind kind, std::string_view name) {
  const auto& cols = table_columns(kind);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i].name == name) return i;
  }
  fail(Errc::internal, "no column " + std::string(name));
}

std::size_t book_price_column(int side, int level) {
  return 3 + static_cast<std::size_t>(side * kBookDepth * 2 + (level - 1) * 2);
}

std::size_t book_size_column(int side, int level) { return book_price_column(side, level) + 1; }

// ---------------------------------------------------------------------------

ColumnWriter::ColumnWriter(const std::filesystem::path& path, ValueType type, Encoding encoding, bool sync)
    : path_(path), type_(type), encoding_(encoding), sync_(sync) {
  // The file is reopened for each flush so that many writers can be live
  // without holding a descriptor each.
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (f == nullptr) fail(Errc::io, "cannot create " + path.string() + ": " + std::strerror(errno));
  std::fclose(f);
  buf_.reserve(kWriteBuffer + 16);
}

ColumnWriter::~ColumnWriter() = default;

void ColumnWriter::append(std::int64_t value) {
  if (encoding_ == Encoding::Plain) {
    unsigned char bytes[8];
    std::memcpy(bytes, &value, sizeof bytes);
    buf_.insert(buf_.end(), bytes, bytes + width_of(type_));
  } else {
    std::uint64_t v = zigzag(value - previous_);
    previous_ = value;
    while (v >= 0x80) {
      buf_.push_back(static_cast<unsigned char>(v | 0x80));
      v >>= 7;
    }
    buf_.push_back(static_cast<unsigned char>(v));
  }
  if (buf_.size() >= kWriteBuffer) flush(false);
}

void ColumnWriter::flush(bool final_sync) {
  if (buf_.empty() && !final_sync) return;
  std::FILE* f = std::fopen(path_.c_str(), "ab");
  if (f == nullptr) fail(Errc::io, "cannot open " + path_.string() + ": " + std::strerror(errno));
  bool ok = std::fwrite(buf_.data(), 1, buf_.size(), f) == buf_.size();
  ok = std::fflush(f) == 0 && ok;
  if (final_sync) ok = ::fsync(fileno(f)) == 0 && ok;
  ok = std::fclose(f) == 0 && ok;
  if (!ok) fail(Errc::io, "write error on " + path_.string());
  bytes_ += buf_.size();
  buf_.clear();
}

std::uint64_t ColumnWriter::close() {
  if (closed_) return bytes_;
  flush(sync_);
  closed_ = true;
  return bytes_;
}

// ---------------------------------------------------------------------------

ColumnReader::ColumnReader(const std::filesystem::path& path, ValueType type, Encoding encoding,
                           std::uint64_t rows)
    : path_(path), type_(type), encoding_(encoding), remaining_(rows), buf_(kReadBuffer) {
  file_ = std::fopen(path.c_str(), "rb");
  if (file_ == nullptr) fail(Errc::io, "cannot open " + path.string() + ": " + std::strerror(errno));
}

ColumnReader::ColumnReader(ColumnReader&& other) noexcept
    : path_(std::move(other.path_)),
      file_(std::exchange(other.file_, nullptr)),
      type_(other.type_),
      encoding_(other.encoding_),
      remaining_(other.remaining_),
      previous_(other.previous_),
      buf_(std::move(other.buf_)),
      pos_(other.pos_),
      len_(other.len_) {}

ColumnReader::~ColumnReader() {
  if (file_ != nullptr) std::fclose(file_);
}

bool ColumnReader::refill() {
  if (pos_ > 0) {
    std::memmove(buf_.data(), buf_.data() + pos_, len_ - pos_);
    len_ -= pos_;
    pos_ = 0;
  }
  const std::size_t got = std::fread(buf_.data() + len_, 1, buf_.size() - len_, file_);
  len_ += got;
  return got > 0;
}

std::size_t ColumnReader::read(std::int64_t* out, std::size_t max) {
  const auto want = static_cast<std::size_t>(std::min<std::uint64_t>(max, remaining_));
  std::size_t n = 0;
  const std::size_t width = width_of(type_);
  while (n < want) {
    if (encoding_ == Encoding::Plain) {
      if (len_ - pos_ < width && !refill()) break;
      while (n < want && len_ - pos_ >= width) {
        std::int64_t v = 0;
        switch (type_) {
          case ValueType::I64: std::memcpy(&v, buf_.data() + pos_, 8); break;
          case ValueType::U32: {
            std::uint32_t u = 0;
            std::memcpy(&u, buf_.data() + pos_, 4);
            v = u;
            break;
          }
          case ValueType::U8: v = buf_[pos_]; break;
        }
        out[n++] = v;
        pos_ += width;
      }
    } else {
      // A varint is at most 10 bytes; keep that much buffered while decoding.
      if (len_ - pos_ < 10) refill();
      if (pos_ == len_) break;
      while (n < want && (len_ - pos_ >= 10 || std::feof(file_))) {
        if (pos_ == len_) break;
        std::uint64_t v = 0;
        int shift = 0;
        unsigned char byte = 0;
        do {
          if (pos_ == len_) fail(Errc::invalid_data, path_.string() + ": truncated varint");
          byte = buf_[pos_++];
          v |= static_cast<std::uint64_t>(byte & 0x7F) << shift;
          shift += 7;
        } while (byte & 0x80);
        previous_ += unzigzag(v);
        out[n++] = previous_;
      }
    }
  }
  if (n < want) fail(Errc::invalid_data, path_.string() + ": column file shorter than manifest row count");
  remaining_ -= n;
  return n;
}

void write_dictionary(const std::filesystem::path& path, const std::vector<std::string>& entries, bool sync) {
  std::string text;
  for (const auto& e : entries) {
    text += e;
    text.push_back('\n');
  }
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (f == nullptr) fail(Errc::io, "cannot create " + path.string());
  bool ok = std::fwrite(text.data(), 1, text.size(), f) == text.size();
  ok = std::fflush(f) == 0 && ok;
  if (sync) ok = ::fsync(fileno(f)) == 0 && ok;
  ok = std::fclose(f) == 0 && ok;
  if (!ok) fail(Errc::io, "cannot write " + path.string());
}

std::vector<std::string> read_dictionary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io, "cannot open " + path.string());
  std::vector<std::string> entries;
  std::string line;
  while (std::getline(in, line)) entries.push_back(line);
  return entries;
}

}  // namespace tickbench::store
