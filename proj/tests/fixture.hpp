#pragma once

#include <random>

#include "pgmm/fbspca.hpp"
#include "pgmm/random.hpp"
#include "pgmm/simulate.hpp"

namespace fixture {

// Noise-free, unshifted, 3 clusters at L = 32; built once per test binary.
struct Small {
  pgmm::Dataset data;
  pgmm::FbModel model;
};

inline const Small& small() {
  static const Small s = [] {
    Small out;
    pgmm::DatasetSpec spec;
    spec.L = 32;
    spec.n_clusters = 3;
    spec.per_cluster = 40;
    spec.snr = pgmm::kNoNoise;
    spec.seed = 7;
    out.data = pgmm::render_dataset(spec);
    pgmm::BandLimitSpec b;
    b.image_side = 32;
    out.model = pgmm::fit(out.data.images, b, 20);
    return out;
  }();
  return s;
}

// Same construction at L = 64, where templates are smooth on the pixel scale.
inline const Small& medium() {
  static const Small s = [] {
    Small out;
    pgmm::DatasetSpec spec;
    spec.L = 64;
    spec.n_clusters = 3;
    spec.per_cluster = 30;
    spec.snr = pgmm::kNoNoise;
    spec.seed = 7;
    out.data = pgmm::render_dataset(spec);
    pgmm::BandLimitSpec b;
    b.image_side = 64;
    out.model = pgmm::fit(out.data.images, b, 50);
    return out;
  }();
  return s;
}

// Random coefficient vector with real omega == 0 entries.
inline std::vector<pgmm::Complex> random_z(const pgmm::FbModel& model, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  std::vector<pgmm::Complex> z(model.m());
  for (int j = 0; j < model.m(); ++j) z[j] = {g(rng), model.omega[j] == 0 ? 0.0 : g(rng)};
  return z;
}

inline double max_abs_diff(const std::vector<pgmm::Complex>& a, const std::vector<pgmm::Complex>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

inline double norm(const std::vector<pgmm::Complex>& a) {
  double s = 0.0;
  for (const auto& v : a) s += std::norm(v);
  return std::sqrt(s);
}

}  // namespace fixture
