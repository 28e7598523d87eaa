#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "pgmm/metrics.hpp"
#include "pgmm/polargmm.hpp"

using namespace pgmm;

namespace {

ClusterParams one_dim(double mr, double mp, double sr, double sp) { return {{mr}, {mp}, {sr}, {sp}}; }

PolarCoeff point(std::vector<double> r, std::vector<double> phi) { return {std::move(r), std::move(phi)}; }

// Samples from C well separated clusters in m = 4 dimensions.
std::vector<PolarCoeff> clustered(int C, int per, std::uint64_t seed, std::vector<int>& labels) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<PolarCoeff> out;
  for (int c = 0; c < C; ++c)
    for (int i = 0; i < per; ++i) {
      PolarCoeff p;
      for (int j = 0; j < 4; ++j) {
        p.r.push_back(5.0 + 4.0 * c + 0.2 * g(rng));
        p.phi.push_back(wrap_angle(2.0 * c - 1.5 + 0.1 * g(rng)));
      }
      out.push_back(p);
      labels.push_back(c);
    }
  return out;
}

}  // namespace

TEST_CASE("cluster_logpdf at the mode equals the closed-form normalizer") {
  ClusterParams M{{1.0, 2.0}, {0.3, -1.0}, {0.5, 0.2}, {0.7, 0.1}};
  const double want = -std::log(0.5) - std::log(0.2) - std::log(0.7) - std::log(0.1) - 2.0 * std::log(2.0 * oracle::kPi);
  CHECK(cluster_logpdf(point({1.0, 2.0}, {0.3, -1.0}), M) == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("a one-dimensional density integrates to one") {
  const ClusterParams M = one_dim(3.0, 2.8, 0.4, 0.3);
  const int nr = 800, np = 800;
  const double r0 = 3.0 - 4.0, r1 = 3.0 + 4.0;
  const double dr = (r1 - r0) / nr, dp = 2.0 * oracle::kPi / np;
  double s = 0.0;
  for (int a = 0; a < nr; ++a)
    for (int b = 0; b < np; ++b)
      s += std::exp(cluster_logpdf(point({r0 + (a + 0.5) * dr}, {-oracle::kPi + (b + 0.5) * dp}), M)) * dr * dp;
  CHECK(s == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("phase distance wraps around the circle") {
  const ClusterParams M = one_dim(1.0, -kPi + 0.01, 1.0, 0.1);
  const double near = cluster_logpdf(point({1.0}, {kPi - 0.01}), M);
  const double same = cluster_logpdf(point({1.0}, {-kPi + 0.01}), M);
  CHECK(same - near == doctest::Approx(0.5 * (0.02 / 0.1) * (0.02 / 0.1)).epsilon(1e-9));
  CHECK(circular_difference(kPi - 0.01, -kPi + 0.01) == doctest::Approx(-0.02).epsilon(1e-12));
  double prev = INFINITY;
  for (double d = 0.0; d < kPi; d += 0.1) {
    const double l = cluster_logpdf(point({1.0}, {wrap_angle(M.mu_phi[0] + d)}), M);
    CHECK(l < prev);
    prev = l;
  }
}

TEST_CASE("e_step on trivial and hand-computed mixtures") {
  const std::vector<PolarCoeff> xs = {point({0.5}, {0.1}), point({2.0}, {-2.0}), point({1.0}, {3.0})};
  MixtureParams single{{1.0}, {one_dim(1.0, 0.0, 1.0, 1.0)}};
  const Responsibilities r1 = e_step(xs, single);
  for (int i = 0; i < 3; ++i) CHECK(r1.w(i, 0) == 1.0);

  MixtureParams twin{{0.5, 0.5}, {one_dim(1.0, 0.0, 1.0, 1.0), one_dim(1.0, 0.0, 1.0, 1.0)}};
  const Responsibilities r2 = e_step(xs, twin);
  for (int i = 0; i < 3; ++i) CHECK(r2.w(i, 0) == doctest::Approx(0.5).epsilon(1e-15));

  const ClusterParams A = one_dim(0.5, 0.0, 0.4, 0.5), B = one_dim(2.0, -2.5, 0.8, 1.2);
  MixtureParams theta{{0.3, 0.7}, {A, B}};
  const Responsibilities r = e_step(xs, theta);
  auto dens = [](const ClusterParams& M, const PolarCoeff& x) {
    const double zr = (x.r[0] - M.mu_r[0]) / M.sigma_r[0];
    double d = std::remainder(x.phi[0] - M.mu_phi[0], 2.0 * oracle::kPi);
    const double zp = d / M.sigma_phi[0];
    return std::exp(-0.5 * (zr * zr + zp * zp)) / (2.0 * oracle::kPi * M.sigma_r[0] * M.sigma_phi[0]);
  };
  for (int i = 0; i < 3; ++i) {
    const double a = 0.3 * dens(A, xs[i]), b = 0.7 * dens(B, xs[i]);
    CHECK(r.w(i, 0) == doctest::Approx(a / (a + b)).epsilon(1e-12));
    CHECK(r.w(i, 0) + r.w(i, 1) == doctest::Approx(1.0).epsilon(1e-15));
  }
  CHECK(mixture_logpdf(xs[0], theta) ==
        doctest::Approx(std::log(0.3 * dens(A, xs[0]) + 0.7 * dens(B, xs[0]))).epsilon(1e-12));
}

TEST_CASE("weighted_circular_mean across the branch cut") {
  const double a = 175.0 * kPi / 180.0;
  const std::vector<double> phi = {a, -a}, w = {1.0, 1.0};
  CHECK(std::abs(std::remainder(weighted_circular_mean(phi, w) - kPi, 2 * kPi)) <= 1e-12);
  const std::vector<double> p2 = {0.2, 0.4}, w2 = {1.0, 3.0};
  CHECK(weighted_circular_mean(p2, w2) == doctest::Approx(0.35).epsilon(1e-14));
}

TEST_CASE("weighted_circular_mean attains the scan minimum") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-kPi, kPi), uw(0.1, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 7;
    std::vector<double> phi(n), w(n);
    for (int i = 0; i < n; ++i) {
      phi[i] = u(rng);
      w[i] = uw(rng);
    }
    const double mu = weighted_circular_mean(phi, w);
    const double scan = oracle::circular_mean_scan(phi, w, 1e-4);
    CHECK(oracle::circular_cost(phi, w, mu) <= oracle::circular_cost(phi, w, scan) + 1e-9);
    CHECK(mu > -kPi);
    CHECK(mu <= kPi);
  }
}

TEST_CASE("m_step on identical samples and against a scalar oracle") {
  const std::vector<PolarCoeff> same(5, point({2.0, 1.0}, {0.4, -2.0}));
  Responsibilities r;
  r.w = Eigen::MatrixXd::Ones(5, 1);
  const MixtureParams t = m_step(same, r);
  CHECK(t.pi[0] == 1.0);
  CHECK(t.clusters[0].mu_r[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(t.clusters[0].mu_phi[1] == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(t.clusters[0].sigma_phi[0] == kSigmaPhiFloor);
  CHECK(t.clusters[0].sigma_r[0] > 0.0);

  const std::vector<PolarCoeff> xs = {point({1.0}, {0.1}), point({2.0}, {0.3}), point({4.0}, {-0.2})};
  Responsibilities w;
  w.w.resize(3, 2);
  w.w << 0.2, 0.8, 0.5, 0.5, 0.9, 0.1;
  const MixtureParams th = m_step(xs, w);
  const double N0 = 1.6;
  const double mr = (0.2 * 1 + 0.5 * 2 + 0.9 * 4) / N0;
  const double vr = (0.2 * std::pow(1 - mr, 2) + 0.5 * std::pow(2 - mr, 2) + 0.9 * std::pow(4 - mr, 2)) / N0;
  const double mp = (0.2 * 0.1 + 0.5 * 0.3 + 0.9 * -0.2) / N0;
  const double vp = (0.2 * std::pow(0.1 - mp, 2) + 0.5 * std::pow(0.3 - mp, 2) + 0.9 * std::pow(-0.2 - mp, 2)) / N0;
  CHECK(th.pi[0] == doctest::Approx(N0 / 3).epsilon(1e-14));
  CHECK(th.clusters[0].mu_r[0] == doctest::Approx(mr).epsilon(1e-12));
  CHECK(th.clusters[0].sigma_r[0] == doctest::Approx(std::sqrt(vr)).epsilon(1e-12));
  CHECK(th.clusters[0].mu_phi[0] == doctest::Approx(mp).epsilon(1e-12));
  CHECK(th.clusters[0].sigma_phi[0] == doctest::Approx(std::sqrt(vp)).epsilon(1e-12));
}

TEST_CASE("EM increases the likelihood and separates well-separated clusters") {
  std::vector<int> labels;
  const auto xs = clustered(3, 40, 5, labels);
  const MixtureParams init = init_kmeanspp(xs, 3, 11);
  std::vector<double> trace;
  const MixtureParams fit = fit_batch(xs, init, 10, &trace);
  REQUIRE(trace.size() == 11);
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] >= trace[i - 1] - 1e-9 * std::abs(trace[i - 1]));
  double s = 0.0;
  for (double p : fit.pi) s += p;
  CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  const Responsibilities r = e_step(xs, fit);
  std::vector<int> pred(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    CHECK(r.w.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
    r.w.row(i).maxCoeff(&pred[i]);
  }
  CHECK(accuracy(labels, pred) == 1.0);
}

TEST_CASE("densities are invariant under a common steerable rotation") {
  const std::vector<int> omega = {0, 1, 2, 5};
  ClusterParams M{{1.0, 2.0, 0.5, 1.5}, {0.0, 0.4, -1.2, 2.5}, {0.3, 0.5, 0.2, 0.4}, {0.2, 0.6, 0.3, 0.5}};
  const PolarCoeff x = point({1.1, 1.7, 0.6, 1.2}, {0.0, 0.9, -1.0, 2.0});
  const double a = 0.77;
  const PolarCoeff xr = rotate(x, a, omega);
  const PolarCoeff mr = rotate(point(M.mu_r, M.mu_phi), a, omega);
  ClusterParams Mr = M;
  Mr.mu_phi = mr.phi;
  CHECK(cluster_logpdf(xr, Mr) == doctest::Approx(cluster_logpdf(x, M)).epsilon(1e-12));
}

TEST_CASE("init_kmeanspp validation and determinism") {
  std::vector<int> labels;
  const auto xs = clustered(2, 5, 1, labels);
  CHECK_THROWS_AS(init_kmeanspp(xs, 11, 1), Error);
  CHECK_THROWS_AS(init_kmeanspp(xs, 0, 1), Error);
  const MixtureParams a = init_kmeanspp(xs, 2, 3), b = init_kmeanspp(xs, 2, 3);
  CHECK(a.pi == b.pi);
  CHECK(a.clusters[0].mu_r == b.clusters[0].mu_r);
}

TEST_CASE("mixture file round trip") {
  std::vector<int> labels;
  const auto xs = clustered(3, 10, 2, labels);
  const MixtureParams t = init_kmeanspp(xs, 3, 4);
  const auto path = std::filesystem::temp_directory_path() / "pgmm_mixture_test.bin";
  save_mixture(t, path.string());
  const MixtureParams back = load_mixture(path.string());
  CHECK(back.pi == t.pi);
  for (int c = 0; c < 3; ++c) {
    CHECK(back.clusters[c].mu_r == t.clusters[c].mu_r);
    CHECK(back.clusters[c].mu_phi == t.clusters[c].mu_phi);
    CHECK(back.clusters[c].sigma_r == t.clusters[c].sigma_r);
    CHECK(back.clusters[c].sigma_phi == t.clusters[c].sigma_phi);
  }
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_mixture(path.string()), Error);
}
