#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tickbench {

/// Error categories shared by the C++ core and the C API status codes.
enum class Errc : int {
  invalid_argument = 1,
  not_found = 2,
  invalid_data = 3,
  io = 4,
  config = 5,
  schema_mismatch = 6,
  query = 7,
  unsupported = 8,
  connection = 9,
  already_exists = 10,
  internal = 11,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace tickbench
