#include "io.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "tickbench/error.hpp"

namespace tickbench::io {

namespace {

std::string errno_text() { return std::strerror(errno); }

}  // namespace

LineReader::LineReader(const std::filesystem::path& path) : path_(path), buf_(4u << 20) {
  file_ = std::fopen(path.c_str(), "rb");
  if (file_ == nullptr) fail(Errc::io, "cannot open " + path.string() + ": " + errno_text());
}

LineReader::~LineReader() {
  if (file_ != nullptr) std::fclose(file_);
}

bool LineReader::refill() {
  if (eof_) return false;
  if (begin_ > 0) {
    std::memmove(buf_.data(), buf_.data() + begin_, end_ - begin_);
    end_ -= begin_;
    begin_ = 0;
  }
  if (end_ == buf_.size()) buf_.resize(buf_.size() * 2);
  const std::size_t got = std::fread(buf_.data() + end_, 1, buf_.size() - end_, file_);
  if (got == 0) {
    if (std::ferror(file_)) fail(Errc::io, "read error on " + path_.string());
    eof_ = true;
    return false;
  }
  end_ += got;
  return true;
}

bool LineReader::next(std::string_view& line) {
  for (;;) {
    const char* start = buf_.data() + begin_;
    const void* nl = std::memchr(start, '\n', end_ - begin_);
    if (nl != nullptr) {
      const auto len = static_cast<std::size_t>(static_cast<const char*>(nl) - start);
      line = std::string_view(start, len);
      begin_ += len + 1;
      ++line_no_;
      return true;
    }
    if (!refill()) {
      if (begin_ == end_) return false;
      line = std::string_view(buf_.data() + begin_, end_ - begin_);
      begin_ = end_;
      ++line_no_;
      return true;
    }
  }
}

FileWriter::FileWriter(const std::filesystem::path& path, bool sync_on_close) : path_(path), sync_(sync_on_close) {
  file_ = std::fopen(path.c_str(), "wb");
  if (file_ == nullptr) fail(Errc::io, "cannot create " + path.string() + ": " + errno_text());
  std::setvbuf(file_, nullptr, _IOFBF, 1u << 20);
}

FileWriter::~FileWriter() {
  if (file_ != nullptr) std::fclose(file_);
}

void FileWriter::write(const void* data, std::size_t size) {
  if (size == 0) return;
  if (std::fwrite(data, 1, size, file_) != size) {
    fail(Errc::io, "write error on " + path_.string() + ": " + errno_text());
  }
  bytes_ += size;
}

std::uint64_t FileWriter::close() {
  if (file_ == nullptr) return bytes_;
  bool ok = std::fflush(file_) == 0;
  if (ok && sync_) ok = ::fsync(fileno(file_)) == 0;
  ok = (std::fclose(file_) == 0) && ok;
  file_ = nullptr;
  if (!ok) fail(Errc::io, "cannot finish " + path_.string() + ": " + errno_text());
  return bytes_;
}

void sync_directory(const std::filesystem::path& dir) {
  const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
  if (fd < 0) return;
  ::fsync(fd);
  ::close(fd);
}

std::size_t split_fields(std::string_view line, std::string_view* fields, std::size_t max_fields) {
  std::size_t n = 0;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (n == max_fields) return max_fields + 1;
    if (comma == std::string_view::npos) {
      fields[n++] = line.substr(start);
      return n;
    }
    fields[n++] = line.substr(start, comma - start);
    start = comma + 1;
  }
}

}  // namespace tickbench::io
