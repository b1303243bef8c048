#pragma once

#include <cstdio>
#include <string>
#include <vector>

namespace nvh {

/// Decimal rendering of a double that round-trips exactly.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Split one CSV line on commas (no quoting; fields are trimmed of spaces).
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace nvh
