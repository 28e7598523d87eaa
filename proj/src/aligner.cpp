#include "pgmm/aligner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pgmm/random.hpp"

namespace pgmm {

namespace {

constexpr double kInvTwoPi = 1.0 / kTwoPi;
constexpr double kLog2Pi = 1.8378770664093454836;

// Any representative of x modulo 2pi with |value| <= pi; only its square is used.
inline double wrap_fast(double x) { return x - kTwoPi * std::nearbyint(x * kInvTwoPi); }

std::vector<int> translation_order(std::span<const CachedTranslation> caches) {
  std::vector<int> order(std::max<std::size_t>(caches.size(), 1));
  std::iota(order.begin(), order.end(), 0);
  if (!caches.empty())
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return caches[a].t.norm() < caches[b].t.norm(); });
  return order;
}

std::vector<Complex> translated(std::span<const Complex> z, std::span<const CachedTranslation> caches,
                                int ti) {
  if (caches.empty()) return {z.begin(), z.end()};
  return translate_cached(caches[ti], z);
}

}  // namespace

PolarCoeff apply_pose(std::span<const Complex> z, const PoseEstimate& pose,
                      std::span<const CachedTranslation> caches, std::span<const int> omega) {
  return rotate(PolarCoeff::from_complex(translated(z, caches, pose.t_index)), pose.alpha, omega);
}

PoseEstimate align_sample(std::span<const Complex> z, const MixtureParams& theta,
                          const RotationGrid& rot_grid, std::span<const CachedTranslation> caches,
                          std::span<const int> omega) {
  const int m = static_cast<int>(z.size());
  const int C = theta.C();
  if (theta.m() != m || static_cast<int>(omega.size()) != m)
    throw Error("align_sample: dimension mismatch");

  // Per-cluster constants: log pi + normalizer, and phase precisions.
  std::vector<double> base(C);
  std::vector<double> mu_phi(static_cast<std::size_t>(C) * m), h_phi(mu_phi.size());
  for (int c = 0; c < C; ++c) {
    const ClusterParams& M = theta.clusters[c];
    double s = 0.0;
    for (int j = 0; j < m; ++j) {
      s += std::log(M.sigma_r[j]) + std::log(M.sigma_phi[j]);
      mu_phi[c * m + j] = M.mu_phi[j];
      h_phi[c * m + j] = 0.5 / (M.sigma_phi[j] * M.sigma_phi[j]);
    }
    base[c] = std::log(theta.pi[c]) - s - m * kLog2Pi;
  }

  PoseEstimate best;
  double best_score = -std::numeric_limits<double>::infinity();
  bool found = false;
  std::vector<double> a_c(C), l(C), phase(m);
  for (int ti : translation_order(caches)) {
    const PolarCoeff p = PolarCoeff::from_complex(translated(z, caches, ti));
    for (int c = 0; c < C; ++c) {
      const ClusterParams& M = theta.clusters[c];
      double e = 0.0;
      for (int j = 0; j < m; ++j) {
        const double d = (p.r[j] - M.mu_r[j]) / M.sigma_r[j];
        e += 0.5 * d * d;
      }
      a_c[c] = base[c] - e;
    }
    for (double alpha : rot_grid.angles) {
      for (int j = 0; j < m; ++j) phase[j] = p.phi[j] + alpha * omega[j];
      double hi = -std::numeric_limits<double>::infinity();
      for (int c = 0; c < C; ++c) {
        const double* mu = &mu_phi[c * m];
        const double* h = &h_phi[c * m];
        double e = 0.0;
        for (int j = 0; j < m; ++j) {
          const double d = wrap_fast(phase[j] - mu[j]);
          e += h[j] * d * d;
        }
        l[c] = a_c[c] - e;
        hi = std::max(hi, l[c]);
      }
      double s = 0.0;
      for (int c = 0; c < C; ++c) s += std::exp(l[c] - hi);
      const double score = hi + std::log(s);
      if (!found || score > best_score) {
        found = true;
        best_score = score;
        best.alpha = alpha;
        best.t_index = caches.empty() ? 0 : ti;
        best.t = caches.empty() ? Vec2{} : caches[ti].t;
      }
    }
  }

  // Report the score and cluster through the reference density so they are
  // consistent with mixture_logpdf on the aligned sample.
  const PolarCoeff aligned = apply_pose(z, best, caches, omega);
  double top = -std::numeric_limits<double>::infinity();
  std::vector<double> lc(C);
  for (int c = 0; c < C; ++c) {
    lc[c] = std::log(theta.pi[c]) + cluster_logpdf(aligned, theta.clusters[c]);
    if (lc[c] > top) {
      top = lc[c];
      best.cluster_hint = c;
    }
  }
  double s = 0.0;
  for (int c = 0; c < C; ++c) s += std::exp(lc[c] - top);
  best.score = top + std::log(s);
  return best;
}

RotationGrid iteration_rotation_grid(int n_alpha, std::uint64_t seed, int iteration) {
  return make_rotation_grid(n_alpha, stream_seed(seed, 0x726f74ULL + static_cast<std::uint64_t>(iteration)));
}

std::vector<PoseEstimate> align_batch(const Eigen::MatrixXcd& samples, const MixtureParams& theta,
                                      const RotationGrid& rot_grid,
                                      std::span<const CachedTranslation> caches,
                                      std::span<const int> omega) {
  const int n = static_cast<int>(samples.cols());
  const int m = static_cast<int>(samples.rows());
  std::vector<PoseEstimate> out(n);
#pragma omp parallel for schedule(dynamic, 8)
  for (int i = 0; i < n; ++i) {
    std::vector<Complex> z(samples.col(i).data(), samples.col(i).data() + m);
    out[i] = align_sample(z, theta, rot_grid, caches, omega);
  }
  return out;
}

}  // namespace pgmm
