#pragma once

#include <charconv>
#include <sstream>
#include <string>
#include <vector>

#include "pgmm/image.hpp"

namespace pgmm::detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
T parse_field(const std::string& s, const std::string& where) {
  T v{};
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e) throw Error(where + ": cannot parse '" + s + "'");
  return v;
}

}  // namespace pgmm::detail
