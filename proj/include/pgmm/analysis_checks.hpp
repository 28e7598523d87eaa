#pragma once

#include <ostream>
#include <span>
#include <vector>

#include "pgmm/fb_basis.hpp"
#include "pgmm/fbspca.hpp"

namespace pgmm {

struct GramReport {
  int k = 0;
  double max_offdiag = 0.0;
  double max_diag_dev = 0.0;
};

/// Discrete Gram matrix of the k-block Fourier-space grids against the identity.
GramReport gram_check(const BasisGrid& basis, int k);
std::vector<GramReport> gram_check_all(const BasisGrid& basis);

/// Eigenvalues (descending) of (1/n) sum z_k z_k^H over the encoded images,
/// z_k the coefficients of the components with omega == k.
std::vector<double> covariance_rank_check(const ImageStack& images, const FbModel& model, int k);

/// GRAM_K<k>_OFFDIAG and GRAM_K<k>_DIAG report lines.
void write_gram_reports(std::ostream& os, std::span<const GramReport> reports);

}  // namespace pgmm
