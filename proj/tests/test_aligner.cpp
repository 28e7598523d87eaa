#include <cmath>
#include <random>

#include "doctest.h"
#include "fixture.hpp"
#include "pgmm/aligner.hpp"
#include "pgmm/metrics.hpp"

using namespace pgmm;

namespace {

// One tight cluster centered on the coefficients of a fixture image.
MixtureParams tight_cluster(const PolarCoeff& x) {
  ClusterParams M{x.r, x.phi, std::vector<double>(x.size(), 0.05), std::vector<double>(x.size(), 0.05)};
  return {{1.0}, {M}};
}

double circ(double a, double b) { return std::abs(std::remainder(a - b, 2 * kPi)); }

}  // namespace

TEST_CASE("a planted rotation is recovered to within half a grid step") {
  const auto& fx = fixture::small();
  const FbModel& m = fx.model;
  const auto x = encode_complex(m, fx.data.images[0]);
  const MixtureParams theta = tight_cluster(PolarCoeff::from_complex(x));
  const RotationGrid grid = make_rotation_grid(60, 3);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 2 * kPi);
  for (int trial = 0; trial < 10; ++trial) {
    const double a = u(rng);
    const auto z = rotate_complex(x, -a, m.omega);
    const PoseEstimate p = align_sample(z, theta, grid, {}, m.omega);
    CHECK(circ(p.alpha, a) <= kPi / 60 + 1e-9);
    CHECK(p.t == Vec2{});
    CHECK(p.t_index == 0);
  }
}

TEST_CASE("an origin-only translation list yields t = 0") {
  const auto& fx = fixture::small();
  const FbModel& m = fx.model;
  const auto z = encode_complex(m, fx.data.images[3]);
  const MixtureParams theta = tight_cluster(PolarCoeff::from_complex(encode_complex(m, fx.data.images[1])));
  const std::vector<CachedTranslation> caches = build_caches(m, make_translation_grid(6.0, 0));
  const PoseEstimate p = align_sample(z, theta, make_rotation_grid_at(12, 0.0), caches, m.omega);
  CHECK(p.t == Vec2{});
}

TEST_CASE("the reported score is the mixture density of the aligned sample and is grid-optimal") {
  const auto& fx = fixture::small();
  const FbModel& m = fx.model;
  std::vector<PolarCoeff> xs;
  for (int i : {0, 40, 80}) xs.push_back(encode(m, fx.data.images[i]));
  MixtureParams theta;
  for (const auto& x : xs) {
    theta.pi.push_back(1.0 / 3);
    theta.clusters.push_back({x.r, x.phi, std::vector<double>(m.m(), 0.5), std::vector<double>(m.m(), 0.8)});
  }
  const RotationGrid grid = make_rotation_grid(16, 5);
  const TranslationGrid tg = make_translation_grid(3.0, 2);
  const std::vector<CachedTranslation> caches = build_caches(m, tg);
  for (int i : {5, 50, 100}) {
    const auto z = encode_complex(m, fx.data.images[i]);
    const PoseEstimate p = align_sample(z, theta, grid, caches, m.omega);
    CHECK(p.score == doctest::Approx(mixture_logpdf(apply_pose(z, p, caches, m.omega), theta)).epsilon(1e-12));
    double best = -INFINITY;
    for (const auto& c : caches)
      for (double a : grid.angles)
        best = std::max(best, mixture_logpdf(rotate(PolarCoeff::from_complex(translate_cached(c, z)), a, m.omega), theta));
    CHECK(p.score >= best - 1e-9 * std::abs(best));
  }
}

TEST_CASE("align_batch is deterministic") {
  const auto& fx = fixture::small();
  const FbModel& m = fx.model;
  const Eigen::MatrixXcd Z = encode_stack(m, fx.data.images);
  const MixtureParams theta = tight_cluster(encode(m, fx.data.images[0]));
  const RotationGrid grid = iteration_rotation_grid(20, 9, 0);
  const auto a = align_batch(Z, theta, grid, {}, m.omega);
  const auto b = align_batch(Z, theta, grid, {}, m.omega);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].alpha == b[i].alpha);
    CHECK(a[i].score == b[i].score);
  }
  CHECK(iteration_rotation_grid(20, 9, 0).alpha0 != iteration_rotation_grid(20, 9, 1).alpha0);
}

TEST_CASE("noise-free rotated copies give AE-2 below one grid step") {
  const auto& fx = fixture::small();
  const FbModel& m = fx.model;
  const auto x = encode_complex(m, fx.data.images[0]);
  const MixtureParams theta = tight_cluster(PolarCoeff::from_complex(x));
  const int n_alpha = 36;
  const RotationGrid grid = make_rotation_grid(n_alpha, 2);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  std::vector<Pose> truth, pred;
  for (int i = 0; i < 30; ++i) {
    const double a = u(rng);
    const PoseEstimate p = align_sample(rotate_complex(x, -a, m.omega), theta, grid, {}, m.omega);
    truth.push_back({a, {}});
    pred.push_back({p.alpha, {}});
  }
  const std::vector<int> labels(30, 0);
  const AlignmentErrors e = relative_alignment_errors(truth, pred, labels, labels);
  CHECK(e.ae2 <= 2 * kPi / n_alpha);
  CHECK(e.te2 == 0.0);
}
