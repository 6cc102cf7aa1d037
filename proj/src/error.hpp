#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace adiasim {

// Error categories; mirrored one-to-one by the C API status codes.
enum class Errc {
  parse = 1,
  domain = 2,
  config = 3,
  simulation = 4,
  io = 5,
  invalid_argument = 6,
  internal = 7,
};

class Error : public std::runtime_error {
public:
  Error(Errc code, std::string message, std::ptrdiff_t offset = -1)
      : std::runtime_error(std::move(message)), code_(code), offset_(offset) {}

  Errc code() const { return code_; }

  // Byte offset into the originating source text for parse/domain errors,
  // -1 when not applicable.
  std::ptrdiff_t offset() const { return offset_; }

private:
  Errc code_;
  std::ptrdiff_t offset_;
};

[[noreturn]] inline void fail(Errc code, std::string message, std::ptrdiff_t offset = -1) {
  throw Error(code, std::move(message), offset);
}

} // namespace adiasim
