#include "pgmm/analysis_checks.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "pgmm/metrics.hpp"

namespace pgmm {

GramReport gram_check(const BasisGrid& basis, int k) {
  if (k < 0 || k > basis.k_max()) throw Error("gram_check: k outside the index set");
  const int p = basis.block_size(k);
  const auto& support = basis.polar.support;
  GramReport r;
  r.k = k;
  for (int a = 0; a < p; ++a) {
    const auto& fa = basis.at(k, a + 1).fourier;
    for (int b = a; b < p; ++b) {
      const auto& fb = basis.at(k, b + 1).fourier;
      Complex g = 0.0;
      for (int s : support) g += std::conj(fa[s]) * fb[s];
      if (a == b)
        r.max_diag_dev = std::max(r.max_diag_dev, std::abs(g - 1.0));
      else
        r.max_offdiag = std::max(r.max_offdiag, std::abs(g));
    }
  }
  return r;
}

std::vector<GramReport> gram_check_all(const BasisGrid& basis) {
  std::vector<GramReport> out(basis.k_max() + 1);
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k <= basis.k_max(); ++k) out[k] = gram_check(basis, k);
  return out;
}

std::vector<double> covariance_rank_check(const ImageStack& images, const FbModel& model, int k) {
  if (images.empty()) throw Error("covariance_rank_check: empty stack");
  std::vector<int> cols;
  for (int j = 0; j < model.m(); ++j)
    if (model.omega[j] == k) cols.push_back(j);
  if (cols.empty()) return {};
  const Eigen::MatrixXcd z = encode_stack(model, images);
  Eigen::MatrixXcd zk(static_cast<Eigen::Index>(cols.size()), z.cols());
  for (std::size_t a = 0; a < cols.size(); ++a) zk.row(a) = z.row(cols[a]);
  const Eigen::MatrixXcd cov = zk * zk.adjoint() / static_cast<double>(z.cols());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(cov, Eigen::EigenvaluesOnly);
  std::vector<double> vals(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(vals.begin(), vals.end(), std::greater<>());
  return vals;
}

void write_gram_reports(std::ostream& os, std::span<const GramReport> reports) {
  for (const auto& r : reports) {
    const std::string key = "GRAM_K" + std::to_string(r.k);
    os << format_metric(key + "_OFFDIAG", r.max_offdiag) << '\n';
    os << format_metric(key + "_DIAG", r.max_diag_dev) << '\n';
  }
}

}  // namespace pgmm
