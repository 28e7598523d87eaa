#pragma once

#include <span>
#include <string>
#include <vector>

#include "pgmm/image.hpp"

namespace pgmm {

/// "PGMMSTK1", u32 LE count, u32 LE side, then float32 LE pixels image by image.
void write_stack(const ImageStack& images, const std::string& path);
ImageStack read_stack(const std::string& path);

/// Binary PGM (P5, maxval 255), min-max scaled.
void write_pgm(const Image& image, const std::string& path);

/// CSV with header "index,label".
void write_labels(std::span<const int> labels, const std::string& path);
std::vector<int> read_labels(const std::string& path);

}  // namespace pgmm
