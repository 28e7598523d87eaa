#pragma once

#include <vector>

#include "pgmm/image.hpp"

namespace pgmm {

/// Image size and band-limit parameters of a Fourier-Bessel basis.
struct BandLimitSpec {
  int image_side = 64;
  double radius_ratio = 0.6;
  double truncation = 10.0;

  /// Fourier-disk radius gamma in cycles/pixel (Nyquist 0.5 scaled by the radius ratio).
  double band_limit() const { return radius_ratio * 0.5; }

  /// Largest admissible Bessel root. The truncation multiplier is normalized so
  /// that 10.0 yields the sampling bound 2*pi*gamma*(particle radius in pixels).
  double root_bound() const;

  void validate() const;
};

/// J_k(x) for integer k (negative orders through J_{-k} = (-1)^k J_k) and x >= 0.
double bessel_j(int order, double x);

/// q-th positive root of J_k, q >= 1.
double bessel_root(int order, int q);

/// All positive roots of J_k not exceeding `bound`, ascending.
std::vector<double> bessel_roots_below(int order, double bound);

/// Admitted (k, q) pairs. Tables are indexed by |k|; p_{-k} = p_k.
struct BesselIndexSet {
  int k_max = -1;
  std::vector<int> p;                      ///< p[k] for k = 0..k_max
  std::vector<std::vector<double>> roots;  ///< roots[k][q-1] = R_{k,q}
  std::vector<std::vector<double>> norms;  ///< norms[k][q-1] = N_{k,q}

  int count(int k) const;
  /// Over k = -k_max..k_max.
  int total_count() const;
  /// Over k = 0..k_max.
  int nonnegative_count() const;
};

BesselIndexSet build_index_set(const BandLimitSpec& spec);

/// Sampled psi^{k,q} for k >= 0, both domains renormalized to unit discrete norm.
struct BasisFunction {
  int k = 0;
  int q = 1;
  std::vector<Complex> fourier;  ///< full centered lattice, zero for r > gamma
  std::vector<Complex> image;    ///< analytic inverse transform, periodized; empty if skipped
};

/// Per-lattice-point polar coordinates and the Fourier disk support.
struct PolarSampling {
  std::vector<double> radius;   ///< cycles/pixel
  std::vector<double> angle;    ///< atan2(col, row)
  std::vector<int> support;     ///< lattice indices with radius <= gamma
};

struct BasisGrid {
  BandLimitSpec spec;
  PolarSampling polar;
  std::vector<BasisFunction> functions;  ///< ordered by k, then q
  std::vector<int> block_start;          ///< functions index of (k, 1), size k_max + 2

  int side() const { return spec.image_side; }
  int k_max() const { return static_cast<int>(block_start.size()) - 2; }
  int block_size(int k) const { return block_start[k + 1] - block_start[k]; }
  const BasisFunction& at(int k, int q) const { return functions[block_start[k] + q - 1]; }
};

PolarSampling polar_sampling(int side, double band_limit);

/// Renormalized Fourier-space samples of psi^{k,q}; k may be negative.
std::vector<Complex> sample_fourier_basis(const PolarSampling& polar, double band_limit, int k,
                                          double root);

/// Periodized analytic inverse transform of psi^{k,q} on the pixel lattice, renormalized.
std::vector<Complex> sample_image_basis(int side, double band_limit, int k, double root);

/// Samples every admitted k >= 0 function. `with_image_space` = false skips the
/// analytic image-space grids (Gram checks only need the Fourier side).
BasisGrid build_basis(const BandLimitSpec& spec, const BesselIndexSet& idx,
                      bool with_image_space = true);

}  // namespace pgmm
