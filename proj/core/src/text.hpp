#pragma once

#include <cstdio>
#include <string>

namespace battdiag::text {

// Six significant digits, "C" formatting.
inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

inline std::string signed_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%+.6g", v);
  return buf;
}

}  // namespace battdiag::text
