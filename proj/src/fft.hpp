#pragma once

#include <span>
#include <vector>

#include "pgmm/image.hpp"

namespace pgmm::detail {

// Unitary 2D DFT on the centered lattice: index (i, j) holds frequency
// ((i - side/2)/side, (j - side/2)/side) cycles/pixel, and spatial index
// (i, j) holds position (i - side/2, j - side/2).
std::vector<Complex> centered_dft(std::span<const Complex> image, int side);
std::vector<Complex> centered_dft(const Image& image);
std::vector<Complex> centered_idft(std::span<const Complex> spectrum, int side);

}  // namespace pgmm::detail
