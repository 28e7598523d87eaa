#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pgmm/fbspca.hpp"

namespace pgmm {

struct ClusterParams {
  std::vector<double> mu_r;
  std::vector<double> mu_phi;
  std::vector<double> sigma_r;
  std::vector<double> sigma_phi;

  int m() const { return static_cast<int>(mu_r.size()); }
};

struct MixtureParams {
  std::vector<double> pi;
  std::vector<ClusterParams> clusters;

  int C() const { return static_cast<int>(pi.size()); }
  int m() const { return clusters.empty() ? 0 : clusters.front().m(); }
};

/// Row-stochastic n x C responsibility matrix.
struct Responsibilities {
  Eigen::MatrixXd w;
  std::vector<int> underflow_rows;  ///< rows replaced by the uniform distribution
};

inline constexpr double kSigmaPhiFloor = 1e-3;
inline constexpr double kSigmaRFloorFactor = 1e-4;

/// Wrapped difference a - b in (-pi, pi].
double circular_difference(double a, double b);

double cluster_logpdf(const PolarCoeff& sample, const ClusterParams& M);
/// log sum_c pi_c f_c(sample).
double mixture_logpdf(const PolarCoeff& sample, const MixtureParams& theta);
double log_likelihood(std::span<const PolarCoeff> samples, const MixtureParams& theta);

Responsibilities e_step(std::span<const PolarCoeff> samples, const MixtureParams& theta);

/// Minimizer of sum_i w_i d_circ(phi_i, mu)^2 over mu, wrapped to (-pi, pi].
double weighted_circular_mean(std::span<const double> phi, std::span<const double> w);

MixtureParams m_step(std::span<const PolarCoeff> samples, const Responsibilities& w);

/// n_inner alternations of e_step and m_step. When `trace` is given it receives
/// the log-likelihood of theta0 followed by the value after every update.
MixtureParams fit_batch(std::span<const PolarCoeff> samples, const MixtureParams& theta0,
                        int n_inner, std::vector<double>* trace = nullptr);

inline constexpr int kInitRestarts = 10;

/// k-means on the magnitudes r (k-means++ seeding, Lloyd iterations, best of
/// kInitRestarts by inertia), then one m_step on the hard assignment.
MixtureParams init_kmeanspp(std::span<const PolarCoeff> samples, int C, std::uint64_t seed);

void save_mixture(const MixtureParams& theta, const std::string& path);
MixtureParams load_mixture(const std::string& path);

}  // namespace pgmm
