#pragma once

#include <cstdio>
#include <string>

namespace gradfeat {

// Fixed text form for doubles in CSV output; one double always prints one
// way, so generated tables compare byte-for-byte across runs.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::string(buf);
}

}  // namespace gradfeat
