#include "pgmm/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <Eigen/Dense>

#include "csv.hpp"
#include "fft.hpp"
#include "pgmm/random.hpp"

namespace pgmm {

TemplateKind parse_template_kind(const std::string& s) {
  if (s == "procedural_blobs" || s == "blobs") return TemplateKind::procedural_blobs;
  if (s == "voxel_phantom" || s == "phantom") return TemplateKind::voxel_phantom;
  throw Error("unknown template kind '" + s + "'");
}

std::string to_string(TemplateKind k) {
  return k == TemplateKind::procedural_blobs ? "procedural_blobs" : "voxel_phantom";
}

void DatasetSpec::validate() const {
  if (L < 8) throw Error("dataset: L must be >= 8");
  if (n_clusters < 1 || per_cluster < 1) throw Error("dataset: cluster counts must be positive");
  if (!(snr > 0.0)) throw Error("dataset: snr must be positive");
  if (!(max_shift >= 0.0) || !(max_shift < L / 4.0)) throw Error("dataset: need 0 <= max_shift < L/4");
  if (!(radius_ratio > 0.0 && radius_ratio <= 1.0)) throw Error("dataset: radius_ratio must lie in (0, 1]");
}

double DatasetSpec::noise_variance() const { return std::isinf(snr) ? 0.0 : 1.0 / snr; }

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

double standard_normal(std::mt19937_64& rng) {
  // Box-Muller; one draw per call keeps streams simple.
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

// Zeroes every frequency outside the disk of radius `gamma` cycles/pixel.
Image low_pass(const Image& in, double gamma) {
  const int L = in.side();
  std::vector<Complex> f = detail::centered_dft(in);
  const int ctr = frame_center(L);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) {
      const double u = static_cast<double>(i - ctr) / L, v = static_cast<double>(j - ctr) / L;
      if (std::hypot(u, v) > gamma) f[static_cast<std::size_t>(i) * L + j] = 0.0;
    }
  const std::vector<Complex> back = detail::centered_idft(f, L);
  Image out(L);
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = back[p].real();
  return out;
}

struct Bump {
  double r, c, s1, s2, th, amp;
};

Image procedural_blobs(const DatasetSpec& spec, std::mt19937_64& rng) {
  const int L = spec.L;
  const double rho = spec.radius_ratio * L / 2.0;
  const int nb = 4 + static_cast<int>(rng() % 5);
  const double s_min = std::min(2.0, rho / 9.6);  // 2 px from L = 64 upward
  std::vector<Bump> bumps;
  while (true) {
    bumps.clear();
    for (int b = 0; b < nb; ++b) {
      Bump k;
      const double rad = 0.8 * rho * std::sqrt(uniform01(rng));
      const double ang = uniform(rng, 0.0, kTwoPi);
      k.r = rad * std::cos(ang);
      k.c = rad * std::sin(ang);
      k.s1 = uniform(rng, s_min, std::max(s_min, 0.22 * rho));
      k.s2 = uniform(rng, s_min, k.s1);
      k.th = uniform(rng, 0.0, kPi);
      k.amp = uniform(rng, 0.4, 1.0) * (uniform01(rng) < 0.3 ? -0.4 : 1.0);
      bumps.push_back(k);
    }
    // Keep the particle net dark and move its dark-mass centroid to the frame center.
    double wsum = 0.0, wabs = 0.0, mr = 0.0, mc = 0.0;
    for (const auto& k : bumps) {
      const double w = k.amp * k.s1 * k.s2;
      wsum += w;
      wabs += std::abs(w);
      mr += w * k.r;
      mc += w * k.c;
    }
    if (wsum < 0.6 * wabs) continue;
    bool inside = true;
    for (auto& k : bumps) {
      k.r -= mr / wsum;
      k.c -= mc / wsum;
      if (std::hypot(k.r, k.c) + 2.0 * k.s1 > rho) inside = false;
    }
    if (inside) break;
  }
  const double ctr = frame_center(L);
  Image img(L);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) {
      double v = 0.0;
      for (const auto& k : bumps) {
        const double dr = i - ctr - k.r, dc = j - ctr - k.c;
        const double a = std::cos(k.th) * dr + std::sin(k.th) * dc;
        const double b = -std::sin(k.th) * dr + std::cos(k.th) * dc;
        v += k.amp * std::exp(-0.5 * (a * a / (k.s1 * k.s1) + b * b / (k.s2 * k.s2)));
      }
      img(i, j) = -v;  // particles are darker than the background
    }
  return img;
}

Image voxel_phantom(const DatasetSpec& spec, std::mt19937_64& rng) {
  const int L = spec.L;
  const double rho = spec.radius_ratio * L / 2.0;
  const int ne = 4 + static_cast<int>(rng() % 5);
  struct Ellipsoid {
    Eigen::Vector3d c;
    Eigen::Matrix3d rot;
    Eigen::Vector3d axes;
    double density;
  };
  std::vector<Ellipsoid> es;
  while (true) {
    es.clear();
    for (int e = 0; e < ne; ++e) {
      Ellipsoid el;
      Eigen::Vector3d g(standard_normal(rng), standard_normal(rng), standard_normal(rng));
      el.c = g.normalized() * (0.5 * rho * std::cbrt(uniform01(rng)));
      Eigen::Matrix3d a;
      for (int x = 0; x < 9; ++x) a(x / 3, x % 3) = standard_normal(rng);
      el.rot = Eigen::HouseholderQR<Eigen::Matrix3d>(a).householderQ();
      for (int x = 0; x < 3; ++x) el.axes[x] = uniform(rng, 2.0, std::max(2.5, 0.35 * rho));
      el.density = uniform(rng, 0.5, 1.0);
      es.push_back(el);
    }
    double wsum = 0.0;
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto& el : es) {
      const double w = el.density * el.axes.prod();
      wsum += w;
      mean += w * el.c;
    }
    bool inside = true;
    for (auto& el : es) {
      el.c -= mean / wsum;
      if (el.c.norm() + el.axes.maxCoeff() > rho) inside = false;
    }
    if (inside) break;
  }
  const double ctr = frame_center(L);
  std::vector<float> vol(static_cast<std::size_t>(L) * L * L, 0.0f);
  for (int x = 0; x < L; ++x)
    for (int y = 0; y < L; ++y)
      for (int z = 0; z < L; ++z) {
        const Eigen::Vector3d p(x - ctr, y - ctr, z - ctr);
        double v = 0.0;
        for (const auto& el : es) {
          const Eigen::Vector3d q = el.rot.transpose() * (p - el.c);
          if ((q.array() / el.axes.array()).matrix().squaredNorm() <= 1.0) v += el.density;
        }
        vol[(static_cast<std::size_t>(x) * L + y) * L + z] = static_cast<float>(v);
      }
  auto at = [&](int x, int y, int z) -> double {
    if (x < 0 || y < 0 || z < 0 || x >= L || y >= L || z >= L) return 0.0;
    return vol[(static_cast<std::size_t>(x) * L + y) * L + z];
  };
  auto trilinear = [&](const Eigen::Vector3d& p) {
    const double fx = std::floor(p[0]), fy = std::floor(p[1]), fz = std::floor(p[2]);
    const int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy), z0 = static_cast<int>(fz);
    const double ax = p[0] - fx, ay = p[1] - fy, az = p[2] - fz;
    double s = 0.0;
    for (int dx = 0; dx < 2; ++dx)
      for (int dy = 0; dy < 2; ++dy)
        for (int dz = 0; dz < 2; ++dz)
          s += (dx ? ax : 1 - ax) * (dy ? ay : 1 - ay) * (dz ? az : 1 - az) * at(x0 + dx, y0 + dy, z0 + dz);
    return s;
  };
  Eigen::Vector3d d(standard_normal(rng), standard_normal(rng), standard_normal(rng));
  d.normalize();
  const Eigen::Vector3d helper = std::abs(d[0]) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  const Eigen::Vector3d e1 = d.cross(helper).normalized();
  const Eigen::Vector3d e2 = d.cross(e1);
  const Eigen::Vector3d origin(ctr, ctr, ctr);
  Image img(L);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) {
      double s = 0.0;
      for (int k = -L / 2; k < L / 2; ++k) s += trilinear(origin + (i - ctr) * e1 + (j - ctr) * e2 + k * d);
      img(i, j) = -s;
    }
  return img;
}

double ncc(const Image& a, const Image& b) {
  const double ma = image_mean(a), mb = image_mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t p = 0; p < a.size(); ++p) {
    const double x = a[p] - ma, y = b[p] - mb;
    sab += x * y;
    saa += x * x;
    sbb += y * y;
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

double max_rotation_correlation(const Image& a, const Image& b, double step) {
  double best = -1.0;
  const int n = static_cast<int>(std::ceil(kTwoPi / step - 1e-9));
  for (int k = 0; k < n; ++k) best = std::max(best, ncc(a, rotate_image(b, k * step, b[0])));
  return best;
}

namespace {

// Max-over-rotation correlation of `cand` against each of `prev`, rotating
// the candidate once per angle.
bool distinct_from(const Image& cand, double fill, const ImageStack& prev, double step, double limit) {
  if (prev.empty()) return true;
  const int n = static_cast<int>(std::ceil(kTwoPi / step - 1e-9));
  for (int k = 0; k < n; ++k) {
    const Image rot = rotate_image(cand, k * step, fill);
    for (const auto& p : prev)
      if (ncc(p, rot) > limit) return false;
  }
  return true;
}

}  // namespace

Templates make_templates(const DatasetSpec& spec) {
  spec.validate();
  constexpr int kAttempts = 10;
  constexpr int kSeedAdvances = 50;
  constexpr double kMaxCorrelation = 0.8;
  const double gamma = spec.radius_ratio * 0.5;
  // A template that fails kAttempts times restarts the whole set on the next stream.
  for (int gen = 0; gen < kSeedAdvances; ++gen) {
    const std::uint64_t base = stream_seed(spec.seed, 0x7e3a7e3aULL + static_cast<std::uint64_t>(gen));
    Templates out;
    bool complete = true;
    for (int t = 0; t < spec.n_clusters && complete; ++t) {
      bool accepted = false;
      for (int attempt = 0; attempt < kAttempts && !accepted; ++attempt) {
        std::mt19937_64 rng = make_stream(base, static_cast<std::uint64_t>(t) * kAttempts + attempt);
        Image raw = spec.template_kind == TemplateKind::procedural_blobs ? procedural_blobs(spec, rng)
                                                                        : voxel_phantom(spec, rng);
        Image img = low_pass(raw, gamma);
        const double mean = image_mean(img);
        const double sd = std::sqrt(image_variance(img));
        for (double& v : img.vec()) v = (v - mean) / sd;
        const double bg = -mean / sd;
        accepted = distinct_from(img, bg, out.images, kPi / 180.0, kMaxCorrelation);
        if (accepted) {
          out.images.push_back(std::move(img));
          out.background.push_back(bg);
        }
      }
      complete = accepted;
    }
    if (complete) return out;
  }
  throw Error("template distinctness check failed after " + std::to_string(kSeedAdvances) + " seed advances");
}

Dataset render_dataset(const DatasetSpec& spec) {
  Dataset ds;
  ds.templates = make_templates(spec);
  const int n = spec.size();
  ds.images.resize(n);
  ds.truth.resize(n);
  const double sigma = std::sqrt(spec.noise_variance());
  const std::uint64_t base = stream_seed(spec.seed, 0xda7a5e7ULL);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    std::mt19937_64 rng = make_stream(base, static_cast<std::uint64_t>(i));
    GroundTruth g;
    g.label = i % spec.n_clusters;
    g.alpha = -kPi + kTwoPi * uniform01(rng);
    if (spec.max_shift > 0.0) {
      while (true) {
        const double a = uniform(rng, -1.0, 1.0), b = uniform(rng, -1.0, 1.0);
        if (a * a + b * b <= 1.0) {
          g.t = {spec.max_shift * a, spec.max_shift * b};
          break;
        }
      }
    }
    Image img = warp_pose(ds.templates.images[g.label], g.alpha, g.t, ds.templates.background[g.label]);
    if (sigma > 0.0)
      for (double& v : img.vec()) v += sigma * standard_normal(rng);
    ds.images[i] = std::move(img);
    ds.truth[i] = g;
  }
  return ds;
}

void write_ground_truth(std::span<const GroundTruth> rows, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path + " for writing");
  os << "index,label,alpha_rad,tx,ty\n";
  char buf[160];
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%d,%.17g,%.17g,%.17g\n", i, rows[i].label, rows[i].alpha,
                  rows[i].t.row, rows[i].t.col);
    os << buf;
  }
  if (!os) throw Error("write failed: " + path);
}

std::vector<GroundTruth> read_ground_truth(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path);
  std::string line;
  if (!std::getline(is, line)) throw Error(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "index,label,alpha_rad,tx,ty") throw Error(path + ":1: unexpected header '" + line + "'");
  std::vector<GroundTruth> rows;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    const auto f = detail::split_csv(line);
    if (f.size() != 5) throw Error(where + ": expected 5 fields, got " + std::to_string(f.size()));
    const long idx = detail::parse_field<long>(f[0], where);
    if (idx != static_cast<long>(rows.size()))
      throw Error(where + ": index " + f[0] + " out of sequence");
    GroundTruth g;
    g.label = detail::parse_field<int>(f[1], where);
    if (g.label < 0) throw Error(where + ": negative label");
    g.alpha = detail::parse_field<double>(f[2], where);
    g.t.row = detail::parse_field<double>(f[3], where);
    g.t.col = detail::parse_field<double>(f[4], where);
    if (!std::isfinite(g.alpha) || !std::isfinite(g.t.row) || !std::isfinite(g.t.col))
      throw Error(where + ": non-finite value");
    rows.push_back(g);
  }
  return rows;
}

}  // namespace pgmm
