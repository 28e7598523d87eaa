#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "pgmm/image.hpp"

namespace pgmm::detail {

template <typename T>
T byteswap_if_big(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

template <typename T>
void write_le(std::ostream& os, T v) {
  v = byteswap_if_big(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_le(std::istream& is, const std::string& what) {
  T v;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw Error(what + ": truncated file");
  return byteswap_if_big(v);
}

// `magic` is compared over exactly 8 bytes (a trailing NUL counts when present).
inline void expect_magic(std::istream& is, const char* magic, const std::string& what) {
  char buf[8];
  if (!is.read(buf, 8) || std::memcmp(buf, magic, 8) != 0) throw Error(what + ": bad magic");
}

inline void write_magic(std::ostream& os, const char* magic) { os.write(magic, 8); }

}  // namespace pgmm::detail
