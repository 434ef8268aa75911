#pragma once

#include <cstdio>
#include <initializer_list>
#include <string>
#include <string_view>

namespace lticert::csv {

/// Shortest round-trip decimal text for a double ('.' decimal separator).
inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string join(std::initializer_list<std::string> fields) {
  std::string out;
  bool first = true;
  for (const auto& f : fields) {
    if (!first) out += ',';
    out += f;
    first = false;
  }
  return out;
}

}  // namespace lticert::csv
