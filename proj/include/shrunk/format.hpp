#pragma once

#include <cstdio>
#include <string>

namespace shrunk {

// Fixed 17-significant-digit decimal; round-trips IEEE doubles exactly.
// Dataset and projection writers are pinned to this width.
inline std::string format_decimal(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Shortest decimal that still round-trips, for report output.
inline std::string format_compact(double v) {
  char buf[40];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v || (v != v && back != back)) break;
  }
  return buf;
}

}  // namespace shrunk
