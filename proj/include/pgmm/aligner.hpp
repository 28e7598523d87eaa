#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pgmm/polargmm.hpp"
#include "pgmm/steer_translate.hpp"

namespace pgmm {

/// Coefficient-space pose: the aligned sample is R_alpha T_t(z).
struct PoseEstimate {
  double alpha = 0.0;  ///< [0, 2pi)
  Vec2 t;
  double score = 0.0;  ///< log mixture density of the aligned sample
  int cluster_hint = 0;
  int t_index = 0;     ///< index into the cache list (0 when no caches are given)
};

/// Exhaustive search over rot_grid x caches. An empty cache list stands for
/// the single translation (0, 0). Ties go to the smallest |t|, then the
/// smallest angle.
PoseEstimate align_sample(std::span<const Complex> z, const MixtureParams& theta,
                          const RotationGrid& rot_grid, std::span<const CachedTranslation> caches,
                          std::span<const int> omega);

/// R_alpha T_t(z) for a pose returned by align_sample with the same caches.
PolarCoeff apply_pose(std::span<const Complex> z, const PoseEstimate& pose,
                      std::span<const CachedTranslation> caches, std::span<const int> omega);

/// Rotation grid for outer iteration `iteration` of a run seeded with `seed`.
RotationGrid iteration_rotation_grid(int n_alpha, std::uint64_t seed, int iteration);

/// Aligns every column of `samples` against theta with one shared rotation grid.
/// Deterministic for a fixed seed regardless of thread count.
std::vector<PoseEstimate> align_batch(const Eigen::MatrixXcd& samples, const MixtureParams& theta,
                                      const RotationGrid& rot_grid,
                                      std::span<const CachedTranslation> caches,
                                      std::span<const int> omega);

}  // namespace pgmm
