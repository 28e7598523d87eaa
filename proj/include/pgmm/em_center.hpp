#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "pgmm/image.hpp"

namespace pgmm {

/// Two-component pixel mixture: signal Gaussian over (row, col, intensity)
/// and background Gaussian over intensity (uniform over position).
/// Intensities live on the per-image min-max normalized [0, 1] scale.
struct CenteringParams {
  Eigen::Vector3d mu_s = Eigen::Vector3d::Zero();
  Eigen::Matrix3d sigma_s = Eigen::Matrix3d::Identity();
  double mu_b = 0.5;
  double sigma_b = 0.25;
};

struct CenterFit {
  Vec2 center;   ///< pixel coordinates (row, col)
  Vec2 offset;   ///< center - frame center
  CenteringParams params;
  bool degenerate = false;
  /// Observed-data log-likelihood before the first update and after each of the n_citer updates.
  std::vector<double> loglik;
};

/// Default initialization: dark-weighted centroid, signal intensity from the
/// darkest decile, background at the median, one shared intensity variance.
CenteringParams initial_centering_params(const Image& image);

CenterFit fit_center(const Image& image, int n_citer,
                     const std::optional<CenteringParams>& init = std::nullopt);

inline constexpr double kCenteringSmoothing = 2.0;

struct CenteredStack {
  ImageStack images;         ///< each input shifted by -offset
  std::vector<Vec2> shifts;  ///< estimated offsets (zero for degenerate images)
  std::vector<bool> degenerate;
};

/// Separable Gaussian blur, edge pixels clamped. sigma <= 0 returns the input.
Image gaussian_smooth(const Image& image, double sigma);

/// Fits each image after smoothing with `smoothing` (pixels); the shift is
/// applied to the unsmoothed input.
CenteredStack center_stack(const ImageStack& images, int n_citer, double smoothing = kCenteringSmoothing);

}  // namespace pgmm
