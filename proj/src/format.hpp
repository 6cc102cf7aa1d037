#pragma once

#include <charconv>
#include <string>

namespace adiasim {

// Shortest decimal form that round-trips to the same double. Used for every
// float we serialize so repeated runs produce byte-identical files.
inline std::string format_double(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

} // namespace adiasim
