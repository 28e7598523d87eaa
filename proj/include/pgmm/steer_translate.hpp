#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pgmm/fbspca.hpp"

namespace pgmm {

/// Translation by t applied in coefficient space.
///
/// The map is real-linear plus an offset: z' = P z + Q conj(z) + mu_t, with
/// P_ij = <Psi_i, S_t Psi_j>, Q_ij = <Psi_i, S_t conj(Psi_j)> (zero for
/// omega_j = 0) and S_t the bilinear zero-fill shift. The conjugate term is
/// what the real image content of each omega > 0 pair contributes.
struct CachedTranslation {
  Vec2 t;
  bool identity = false;  ///< t == 0: application returns z unchanged
  Eigen::MatrixXcd psi_t;
  Eigen::MatrixXcd psi_conj_t;
  Eigen::VectorXcd mu_t;
  std::vector<int> omega;

  /// Spectral norm of (real-linear part - identity) acting on R^{2m}.
  double operator_deviation() const;
};

std::vector<Complex> translate_vanilla(const FbModel& model, std::span<const Complex> z, Vec2 t);
PolarCoeff translate_vanilla(const FbModel& model, const PolarCoeff& z, Vec2 t);

CachedTranslation build_cache(const FbModel& model, Vec2 t);

std::vector<Complex> translate_cached(const CachedTranslation& cache, std::span<const Complex> z);
PolarCoeff translate_cached(const CachedTranslation& cache, const PolarCoeff& z);

struct TranslationGrid {
  double R = 0.0;
  int n_r = 0;
  std::vector<Vec2> points;     ///< origin first, then rings from the inside out
  std::vector<int> ring_sizes;  ///< ring i = 1..n_r
};

/// Origin plus n_r rings; ring i has floor(pi / asin(0.5 / i)) points at
/// radius R i / n_r, rounded to whole pixels.
TranslationGrid make_translation_grid(double R, int n_r);

std::vector<CachedTranslation> build_caches(const FbModel& model, const TranslationGrid& grid);

struct RotationGrid {
  int n_alpha = 1;
  double alpha0 = 0.0;
  std::vector<double> angles;  ///< {2 pi k / n_alpha + alpha0} wrapped to [0, 2pi), ascending
};

RotationGrid make_rotation_grid_at(int n_alpha, double alpha0);
/// alpha0 ~ Unif[0, 2pi) drawn from a generator seeded with `seed`.
RotationGrid make_rotation_grid(int n_alpha, std::uint64_t seed);

}  // namespace pgmm
