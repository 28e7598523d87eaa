#include "pgmm/stack_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>

#include "binary_io.hpp"
#include "csv.hpp"

namespace pgmm {

namespace {
constexpr char kStackMagic[] = "PGMMSTK1";
}

void write_stack(const ImageStack& images, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path + " for writing");
  const int L = images.empty() ? 0 : images.front().side();
  detail::write_magic(os, kStackMagic);
  detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(images.size()));
  detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(L));
  for (const auto& im : images) {
    if (im.side() != L) throw Error("write_stack: images differ in size");
    for (double v : im.data()) detail::write_le<float>(os, static_cast<float>(v));
  }
  if (!os) throw Error("write failed: " + path);
}

ImageStack read_stack(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path);
  const std::string what = "stack " + path;
  detail::expect_magic(is, kStackMagic, what);
  const std::uint32_t n = detail::read_le<std::uint32_t>(is, what);
  const std::uint32_t L = detail::read_le<std::uint32_t>(is, what);
  if (n > 0 && (L < 1 || L > 16384)) throw Error(what + ": implausible side " + std::to_string(L));
  ImageStack out;
  out.reserve(n);
  std::vector<float> buf(static_cast<std::size_t>(L) * L);
  for (std::uint32_t i = 0; i < n; ++i) {
    if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * 4)))
      throw Error(what + ": truncated at image " + std::to_string(i));
    Image im(static_cast<int>(L));
    for (std::size_t p = 0; p < buf.size(); ++p) im[p] = detail::byteswap_if_big(buf[p]);
    out.push_back(std::move(im));
  }
  return out;
}

void write_pgm(const Image& image, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path + " for writing");
  const int L = image.side();
  os << "P5\n" << L << ' ' << L << "\n255\n";
  double lo = 0.0, hi = 0.0;
  if (!image.empty()) {
    const auto [a, b] = std::minmax_element(image.vec().begin(), image.vec().end());
    lo = *a;
    hi = *b;
  }
  const double span = hi - lo;
  for (double v : image.data()) {
    const double s = span > 0.0 ? (v - lo) / span : 0.0;
    os.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * s))));
  }
  if (!os) throw Error("write failed: " + path);
}

void write_labels(std::span<const int> labels, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path + " for writing");
  os << "index,label\n";
  for (std::size_t i = 0; i < labels.size(); ++i) os << i << ',' << labels[i] << '\n';
  if (!os) throw Error("write failed: " + path);
}

std::vector<int> read_labels(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path);
  std::string line;
  if (!std::getline(is, line)) throw Error(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "index,label") throw Error(path + ":1: unexpected header '" + line + "'");
  std::vector<int> out;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    const auto f = detail::split_csv(line);
    if (f.size() != 2) throw Error(where + ": expected 2 fields, got " + std::to_string(f.size()));
    if (detail::parse_field<long>(f[0], where) != static_cast<long>(out.size()))
      throw Error(where + ": index " + f[0] + " out of sequence");
    const int label = detail::parse_field<int>(f[1], where);
    if (label < 0) throw Error(where + ": negative label");
    out.push_back(label);
  }
  return out;
}

}  // namespace pgmm
