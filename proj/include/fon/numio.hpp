#pragma once

#include <charconv>
#include <string>

namespace fon {

/// Shortest decimal form that parses back to the same double; keeps every
/// emitted file byte-stable and round-trip safe.
inline std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

}  // namespace fon
