#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <system_error>

namespace softsensor {

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;  // drop the sign of negative zero
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) return std::to_string(v);
  return std::string(buf, end);
}

}  // namespace softsensor
