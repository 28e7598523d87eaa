#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "pgmm/image.hpp"

namespace pgmm {

enum class TemplateKind { procedural_blobs, voxel_phantom };

TemplateKind parse_template_kind(const std::string& s);
std::string to_string(TemplateKind k);

struct DatasetSpec {
  int L = 64;
  int n_clusters = 5;
  int per_cluster = 300;
  double snr = 0.2;        ///< clean variance / noise variance; infinity disables noise
  double max_shift = 0.0;  ///< pixels; 0 disables translation
  std::uint64_t seed = 1;
  TemplateKind template_kind = TemplateKind::procedural_blobs;
  double radius_ratio = 0.6;  ///< particle disk, fraction of L/2

  void validate() const;
  /// Noise variance for unit-variance templates: 1 / snr (0 when noise is disabled).
  double noise_variance() const;
  int size() const { return n_clusters * per_cluster; }
};

inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

/// True pose of one rendered image: image(p) = template_label(R_alpha (p - t)).
struct GroundTruth {
  int label = 0;
  double alpha = 0.0;  ///< [-pi, pi)
  Vec2 t;
};

struct Templates {
  ImageStack images;  ///< zero mean, unit variance over the frame
  std::vector<double> background;  ///< normalized value of the empty frame per template
};

Templates make_templates(const DatasetSpec& spec);

struct Dataset {
  ImageStack images;
  std::vector<GroundTruth> truth;
  Templates templates;
};

Dataset render_dataset(const DatasetSpec& spec);

/// Normalized cross-correlation maximized over rotations of b in `step` radian increments.
double max_rotation_correlation(const Image& a, const Image& b, double step);

void write_ground_truth(std::span<const GroundTruth> rows, const std::string& path);
std::vector<GroundTruth> read_ground_truth(const std::string& path);

}  // namespace pgmm
