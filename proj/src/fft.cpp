#include "fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>

namespace pgmm::detail {
namespace {

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

// FFTW planning is not thread-safe; execution with the new-array interface is.
PlanPair plans_for(int side) {
  static std::mutex mutex;
  static std::map<int, PlanPair> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(side);
  if (it != cache.end()) return it->second;
  std::vector<Complex> a(static_cast<std::size_t>(side) * side);
  std::vector<Complex> b(a.size());
  auto* in = reinterpret_cast<fftw_complex*>(a.data());
  auto* out = reinterpret_cast<fftw_complex*>(b.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  PlanPair p;
  p.forward = fftw_plan_dft_2d(side, side, in, out, FFTW_FORWARD, flags);
  p.backward = fftw_plan_dft_2d(side, side, in, out, FFTW_BACKWARD, flags);
  cache.emplace(side, p);
  return p;
}

// Moves index (side/2) to 0 (direction = +1) or back (direction = -1).
std::vector<Complex> roll(std::span<const Complex> in, int side, int direction) {
  const int s = direction > 0 ? side / 2 : side - side / 2;
  std::vector<Complex> out(in.size());
  for (int r = 0; r < side; ++r) {
    const int rr = (r + s) % side;
    for (int c = 0; c < side; ++c) {
      const int cc = (c + s) % side;
      out[static_cast<std::size_t>(r) * side + c] = in[static_cast<std::size_t>(rr) * side + cc];
    }
  }
  return out;
}

std::vector<Complex> transform(std::span<const Complex> in, int side, bool forward) {
  if (in.size() != static_cast<std::size_t>(side) * side) throw Error("fft: size mismatch");
  PlanPair p = plans_for(side);
  std::vector<Complex> shifted = roll(in, side, +1);
  std::vector<Complex> out(shifted.size());
  fftw_execute_dft(forward ? p.forward : p.backward,
                   reinterpret_cast<fftw_complex*>(shifted.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  std::vector<Complex> result = roll(out, side, -1);
  const double scale = 1.0 / side;
  for (auto& v : result) v *= scale;
  return result;
}

}  // namespace

std::vector<Complex> centered_dft(std::span<const Complex> image, int side) {
  return transform(image, side, true);
}

std::vector<Complex> centered_dft(const Image& image) {
  std::vector<Complex> c(image.data().begin(), image.data().end());
  return transform(c, image.side(), true);
}

std::vector<Complex> centered_idft(std::span<const Complex> spectrum, int side) {
  return transform(spectrum, side, false);
}

}  // namespace pgmm::detail
