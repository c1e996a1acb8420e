#pragma once

#include <charconv>
#include <string>

namespace bowen {

// Shortest representation that round-trips; used for every number written to CSV.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace bowen
