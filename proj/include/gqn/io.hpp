#pragma once

#include <charconv>
#include <string>

namespace gqn {

/// Shortest decimal text that parses back to exactly `value`.
inline void append_double(std::string& out, double value) {
  char buffer[32];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  out.append(buffer, end);
}

inline std::string format_double(double value) {
  std::string out;
  append_double(out, value);
  return out;
}

}  // namespace gqn
