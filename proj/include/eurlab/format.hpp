#pragma once

#include <cstdio>
#include <string>

namespace eurlab {

// 17 significant digits: every double survives a text round trip.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace eurlab
