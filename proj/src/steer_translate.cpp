#include "pgmm/steer_translate.hpp"

#include <algorithm>
#include <cmath>

#include "pgmm/random.hpp"

namespace pgmm {

std::vector<Complex> translate_vanilla(const FbModel& model, std::span<const Complex> z, Vec2 t) {
  return encode_complex(model, shift_image(decode_complex(model, z), t));
}

PolarCoeff translate_vanilla(const FbModel& model, const PolarCoeff& z, Vec2 t) {
  return PolarCoeff::from_complex(translate_vanilla(model, z.to_complex(), t));
}

CachedTranslation build_cache(const FbModel& model, Vec2 t) {
  const int m = model.m();
  CachedTranslation c;
  c.t = t;
  c.omega = model.omega;
  if (t == Vec2{}) {
    c.identity = true;
    c.psi_t = Eigen::MatrixXcd::Identity(m, m);
    c.psi_conj_t = Eigen::MatrixXcd::Zero(m, m);
    c.mu_t = Eigen::VectorXcd::Zero(m);
    return c;
  }
  const Eigen::Index npx = model.components.rows();
  Eigen::MatrixXcd shifted(npx, m);
  for (int j = 0; j < m; ++j) {
    const ComplexImage s = shift_image(model.component(j), t);
    for (Eigen::Index p = 0; p < npx; ++p) shifted(p, j) = s[static_cast<std::size_t>(p)];
  }
  c.psi_t = model.components.adjoint() * shifted;
  c.psi_conj_t = model.components.adjoint() * shifted.conjugate();
  for (int j = 0; j < m; ++j)
    if (model.omega[j] == 0) c.psi_conj_t.col(j).setZero();

  const Image mu_shift = shift_image(model.mean, t);
  Eigen::VectorXd dmu(npx);
  for (Eigen::Index p = 0; p < npx; ++p)
    dmu[p] = mu_shift[static_cast<std::size_t>(p)] - model.mean[static_cast<std::size_t>(p)];
  c.mu_t = model.components.adjoint() * dmu.cast<Complex>();
  for (int i = 0; i < m; ++i)
    if (model.omega[i] == 0) c.mu_t[i] = c.mu_t[i].real();
  return c;
}

std::vector<Complex> translate_cached(const CachedTranslation& cache, std::span<const Complex> z) {
  const int m = static_cast<int>(cache.omega.size());
  if (static_cast<int>(z.size()) != m) throw Error("translate_cached: dimension mismatch");
  if (cache.identity) return {z.begin(), z.end()};
  Eigen::VectorXcd zin(m);
  for (int j = 0; j < m; ++j) zin[j] = cache.omega[j] == 0 ? Complex(z[j].real(), 0.0) : z[j];
  const Eigen::VectorXcd out = cache.psi_t * zin + cache.psi_conj_t * zin.conjugate() + cache.mu_t;
  std::vector<Complex> res(out.data(), out.data() + m);
  for (int i = 0; i < m; ++i)
    if (cache.omega[i] == 0) res[i] = {res[i].real(), 0.0};
  return res;
}

PolarCoeff translate_cached(const CachedTranslation& cache, const PolarCoeff& z) {
  return PolarCoeff::from_complex(translate_cached(cache, z.to_complex()));
}

double CachedTranslation::operator_deviation() const {
  if (identity) return 0.0;
  const int m = static_cast<int>(omega.size());
  const Eigen::MatrixXd pr = psi_t.real(), pi = psi_t.imag();
  const Eigen::MatrixXd qr = psi_conj_t.real(), qi = psi_conj_t.imag();
  Eigen::MatrixXd a(2 * m, 2 * m);
  a.topLeftCorner(m, m) = pr + qr;
  a.topRightCorner(m, m) = -pi + qi;
  a.bottomLeftCorner(m, m) = pi + qi;
  a.bottomRightCorner(m, m) = pr - qr;
  for (int j = 0; j < m; ++j) {
    a(j, j) -= 1.0;
    if (omega[j] == 0) {
      a.row(m + j).setZero();
      a.col(m + j).setZero();
    } else {
      a(m + j, m + j) -= 1.0;
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
}

TranslationGrid make_translation_grid(double R, int n_r) {
  if (!(R >= 0.0) || n_r < 0) throw Error("translation grid: need R >= 0 and n_r >= 0");
  TranslationGrid g;
  g.R = R;
  g.n_r = n_r;
  g.points.push_back({});
  if (R == 0.0 || n_r == 0) return g;
  for (int i = 1; i <= n_r; ++i) {
    // Upward nudge keeps the exact case i = 1 (pi / asin(1/2) = 6) at 6.
    const int count = static_cast<int>(std::floor(kPi / std::asin(0.5 / i) + 1e-9));
    const double rho = R * i / n_r;
    g.ring_sizes.push_back(count);
    for (int a = 0; a < count; ++a) {
      const double th = kTwoPi * a / count;
      g.points.push_back({std::round(rho * std::cos(th)), std::round(rho * std::sin(th))});
    }
  }
  return g;
}

std::vector<CachedTranslation> build_caches(const FbModel& model, const TranslationGrid& grid) {
  std::vector<CachedTranslation> caches(grid.points.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < static_cast<int>(grid.points.size()); ++i)
    caches[i] = build_cache(model, grid.points[i]);
  return caches;
}

RotationGrid make_rotation_grid_at(int n_alpha, double alpha0) {
  if (n_alpha < 1) throw Error("rotation grid: n_alpha must be >= 1");
  RotationGrid g;
  g.n_alpha = n_alpha;
  g.alpha0 = wrap_angle_positive(alpha0);
  for (int k = 0; k < n_alpha; ++k) g.angles.push_back(wrap_angle_positive(kTwoPi * k / n_alpha + g.alpha0));
  std::sort(g.angles.begin(), g.angles.end());
  return g;
}

RotationGrid make_rotation_grid(int n_alpha, std::uint64_t seed) {
  std::mt19937_64 rng(splitmix64(seed));
  return make_rotation_grid_at(n_alpha, kTwoPi * uniform01(rng));
}

}  // namespace pgmm
