#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "pgmm/simulate.hpp"

using namespace pgmm;

namespace {

// Rotation about (L/2, L/2) by plain bilinear interpolation, written out here
// so the correlation bound is checked independently of rotate_image.
Image rotate_ref(const Image& in, double a, double fill) {
  const int L = in.side();
  const double c0 = L / 2, ca = std::cos(a), sa = std::sin(a);
  Image out(L, fill);
  for (int r = 0; r < L; ++r)
    for (int c = 0; c < L; ++c) {
      const double y = r - c0, x = c - c0;
      const double sr = c0 + ca * y - sa * x, sc = c0 + sa * y + ca * x;
      const int r0 = static_cast<int>(std::floor(sr)), q0 = static_cast<int>(std::floor(sc));
      const double fr = sr - r0, fc = sc - q0;
      auto px = [&](int i, int j) { return i >= 0 && i < L && j >= 0 && j < L ? in(i, j) : fill; };
      out(r, c) = (1 - fr) * ((1 - fc) * px(r0, q0) + fc * px(r0, q0 + 1)) +
                  fr * ((1 - fc) * px(r0 + 1, q0) + fc * px(r0 + 1, q0 + 1));
    }
  return out;
}

double ncc(const Image& a, const Image& b) {
  double ma = 0, mb = 0;
  for (std::size_t p = 0; p < a.size(); ++p) {
    ma += a[p];
    mb += b[p];
  }
  ma /= a.size();
  mb /= b.size();
  double s = 0, sa = 0, sb = 0;
  for (std::size_t p = 0; p < a.size(); ++p) {
    s += (a[p] - ma) * (b[p] - mb);
    sa += (a[p] - ma) * (a[p] - ma);
    sb += (b[p] - mb) * (b[p] - mb);
  }
  return s / std::sqrt(sa * sb);
}

DatasetSpec spec(double snr, double shift, int per = 60) {
  DatasetSpec s;
  s.per_cluster = per;
  s.snr = snr;
  s.max_shift = shift;
  s.seed = 3;
  return s;
}

}  // namespace

TEST_CASE("templates are normalized and pairwise distinct under rotation") {
  const Templates t = make_templates(spec(0.2, 0.0));
  REQUIRE(t.images.size() == 5);
  for (const auto& im : t.images) {
    CHECK(image_mean(im) == doctest::Approx(0.0).epsilon(1e-6).scale(1.0));
    CHECK(image_variance(im) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(max_rotation_correlation(im, im, kPi / 180) == doctest::Approx(1.0).epsilon(1e-9));
  }
  for (std::size_t a = 0; a < t.images.size(); ++a)
    for (std::size_t b = 0; b < a; ++b) {
      double best = -1.0;
      for (int d = 0; d < 360; ++d)
        best = std::max(best, ncc(t.images[b], rotate_ref(t.images[a], d * kPi / 180, t.background[a])));
      CHECK(best <= 0.8 + 1e-3);
    }
}

TEST_CASE("noise-free images are the warped templates exactly") {
  const Dataset d = render_dataset(spec(kNoNoise, 6.0, 10));
  for (int i = 0; i < 50; ++i) {
    const GroundTruth& g = d.truth[i];
    CHECK(d.images[i] == warp_pose(d.templates.images[g.label], g.alpha, g.t, d.templates.background[g.label]));
  }
}

TEST_CASE("added noise has the requested variance") {
  const DatasetSpec s = spec(0.2, 0.0, 100);
  CHECK(s.noise_variance() == doctest::Approx(5.0));
  DatasetSpec clean = s;
  clean.snr = kNoNoise;
  const Dataset noisy = render_dataset(s), base = render_dataset(clean);
  double ss = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < noisy.images.size(); ++i)
    for (std::size_t p = 0; p < noisy.images[i].size(); ++p) {
      const double e = noisy.images[i][p] - base.images[i][p];
      ss += e * e;
      ++n;
    }
  CHECK(ss / n == doctest::Approx(5.0).epsilon(0.02));
}

TEST_CASE("labels are balanced, poses are in range and rendering is deterministic") {
  const DatasetSpec s = spec(0.2, 8.0, 300);
  const Dataset d = render_dataset(s);
  REQUIRE(d.images.size() == 1500);
  std::vector<int> count(5, 0);
  double mr = 0, mc = 0;
  for (const auto& g : d.truth) {
    ++count[g.label];
    CHECK(g.t.norm() <= 8.0);
    CHECK(g.alpha >= -kPi);
    CHECK(g.alpha < kPi);
    mr += g.t.row;
    mc += g.t.col;
  }
  for (int c : count) CHECK(c == 300);
  CHECK(std::abs(mr / 1500) <= 0.5);
  CHECK(std::abs(mc / 1500) <= 0.5);
  const Dataset again = render_dataset(s);
  CHECK(again.images[17] == d.images[17]);
  CHECK(again.truth[1499].alpha == d.truth[1499].alpha);
}

TEST_CASE("dataset spec validation") {
  DatasetSpec s;
  s.max_shift = 16.0;
  CHECK_THROWS_AS(s.validate(), Error);
  s.max_shift = 0.0;
  s.snr = 0.0;
  CHECK_THROWS_AS(s.validate(), Error);
  CHECK_THROWS_AS(parse_template_kind("cubes"), Error);
  CHECK(parse_template_kind("procedural_blobs") == TemplateKind::procedural_blobs);
}

TEST_CASE("ground truth CSV round trip and malformed input") {
  const auto dir = std::filesystem::temp_directory_path();
  const std::string path = (dir / "pgmm_truth_test.csv").string();
  const std::vector<GroundTruth> rows = {{0, 0.1234567890123, {1.5, -2.25}}, {3, -3.0, {0.0, 7.0}}};
  write_ground_truth(rows, path);
  const auto back = read_ground_truth(path);
  REQUIRE(back.size() == 2);
  for (int i = 0; i < 2; ++i) {
    CHECK(back[i].label == rows[i].label);
    CHECK(back[i].alpha == rows[i].alpha);
    CHECK(back[i].t == rows[i].t);
  }
  write_ground_truth({}, path);
  CHECK(read_ground_truth(path).empty());
  for (const char* bad : {"index,label\n0,1\n", "index,label,alpha_rad,tx,ty\n0,1,0.5,1\n",
                          "index,label,alpha_rad,tx,ty\n1,1,0.5,1,2\n", "index,label,alpha_rad,tx,ty\n0,-1,0,0,0\n",
                          "index,label,alpha_rad,tx,ty\n0,1,x,0,0\n"}) {
    std::ofstream(path) << bad;
    CHECK_THROWS_AS(read_ground_truth(path), Error);
  }
  std::filesystem::remove(path);
}
