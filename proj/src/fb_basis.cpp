#include "pgmm/fb_basis.hpp"

#include <cmath>
#include <string>

namespace pgmm {

double BandLimitSpec::root_bound() const {
  return (truncation / 10.0) * kPi * band_limit() * image_side * radius_ratio;
}

void BandLimitSpec::validate() const {
  if (image_side < 8) throw Error("band limit: image_side must be >= 8");
  if (!(radius_ratio > 0.0 && radius_ratio <= 1.0))
    throw Error("band limit: radius_ratio must lie in (0, 1]");
  if (!(truncation > 0.0) || !std::isfinite(truncation))
    throw Error("band limit: truncation must be positive");
}

double bessel_j(int order, double x) {
  if (!std::isfinite(x)) throw Error("bessel_j: non-finite argument");
  if (x < 0.0) throw Error("bessel_j: negative argument");
  const int k = order < 0 ? -order : order;
  const double v = std::cyl_bessel_j(static_cast<double>(k), x);
  return (order < 0 && (k % 2) == 1) ? -v : v;
}

namespace {

constexpr double kScanStep = kPi / 4.0;

double bisect_root(int k, double a, double fa, double b) {
  for (int it = 0; it < 200 && b - a > 1e-13; ++it) {
    const double mid = 0.5 * (a + b);
    const double fm = bessel_j(k, mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (fa > 0.0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

// Walks J_k upward from x = k (no positive roots below the order) in pi/4
// steps; consecutive roots are at least ~pi apart so no bracket holds two.
template <typename Stop>
std::vector<double> scan_roots(int order, Stop stop) {
  const int k = order < 0 ? -order : order;
  std::vector<double> roots;
  double a = k == 0 ? 0.0 : static_cast<double>(k);
  double fa = bessel_j(k, a);
  while (true) {
    const double b = a + kScanStep;
    const double fb = bessel_j(k, b);
    if (fb == 0.0) {
      roots.push_back(b);
    } else if ((fa > 0.0) != (fb > 0.0) && fa != 0.0) {
      roots.push_back(bisect_root(k, a, fa, b));
    }
    if (stop(roots, b)) break;
    a = b;
    fa = fb;
  }
  return roots;
}

}  // namespace

double bessel_root(int order, int q) {
  if (q < 1) throw Error("bessel_root: q must be >= 1");
  auto roots = scan_roots(order, [q](const std::vector<double>& r, double) {
    return static_cast<int>(r.size()) >= q;
  });
  return roots[q - 1];
}

std::vector<double> bessel_roots_below(int order, double bound) {
  auto roots = scan_roots(order, [bound](const std::vector<double>&, double x) { return x > bound; });
  while (!roots.empty() && roots.back() > bound) roots.pop_back();
  return roots;
}

int BesselIndexSet::count(int k) const {
  const int a = k < 0 ? -k : k;
  return a > k_max ? 0 : p[a];
}

int BesselIndexSet::total_count() const {
  int n = 0;
  for (int k = 0; k <= k_max; ++k) n += (k == 0 ? 1 : 2) * p[k];
  return n;
}

int BesselIndexSet::nonnegative_count() const {
  int n = 0;
  for (int k = 0; k <= k_max; ++k) n += p[k];
  return n;
}

BesselIndexSet build_index_set(const BandLimitSpec& spec) {
  spec.validate();
  const double bound = spec.root_bound();
  const double gamma = spec.band_limit();
  BesselIndexSet idx;
  for (int k = 0;; ++k) {
    std::vector<double> roots = bessel_roots_below(k, bound);
    if (roots.empty()) break;
    std::vector<double> norms;
    norms.reserve(roots.size());
    for (double root : roots) {
      // Unit L2 norm over the disk with the area element r dr dphi.
      norms.push_back(1.0 / (std::sqrt(kPi) * gamma * std::abs(bessel_j(k + 1, root))));
    }
    idx.p.push_back(static_cast<int>(roots.size()));
    idx.roots.push_back(std::move(roots));
    idx.norms.push_back(std::move(norms));
    idx.k_max = k;
  }
  if (idx.k_max < 0) throw Error("empty basis: no Bessel root below bound " + std::to_string(bound));
  return idx;
}

PolarSampling polar_sampling(int side, double band_limit) {
  PolarSampling ps;
  const std::size_t n = static_cast<std::size_t>(side) * side;
  ps.radius.resize(n);
  ps.angle.resize(n);
  const int ctr = frame_center(side);
  for (int i = 0; i < side; ++i) {
    for (int j = 0; j < side; ++j) {
      const double u = static_cast<double>(i - ctr) / side;
      const double v = static_cast<double>(j - ctr) / side;
      const std::size_t at = static_cast<std::size_t>(i) * side + j;
      ps.radius[at] = std::hypot(u, v);
      ps.angle[at] = std::atan2(v, u);
      if (ps.radius[at] <= band_limit) ps.support.push_back(static_cast<int>(at));
    }
  }
  return ps;
}

namespace {

void normalize(std::vector<Complex>& v) {
  double s = 0.0;
  for (const auto& x : v) s += std::norm(x);
  const double inv = 1.0 / std::sqrt(s);
  for (auto& x : v) x *= inv;
}

Complex i_pow(int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

// Half-width of the block of frame translates summed when periodizing the
// analytic inverse transform (tails decay like r^{-5/2}).
constexpr int kPeriodImages = 2;

struct RadialSamples {
  std::vector<double> b;          // 2 pi gamma rho per (pixel, translate)
  std::vector<double> jk;         // J_k(b)
  std::vector<Complex> angular;   // e^{i k theta}
};

RadialSamples image_radial_samples(int side, double band_limit, int k) {
  const int ctr = frame_center(side);
  const int per = 2 * kPeriodImages + 1;
  const std::size_t n = static_cast<std::size_t>(side) * side * per * per;
  RadialSamples rs;
  rs.b.reserve(n);
  rs.jk.reserve(n);
  rs.angular.reserve(n);
  for (int i = 0; i < side; ++i) {
    for (int j = 0; j < side; ++j) {
      for (int a = -kPeriodImages; a <= kPeriodImages; ++a) {
        for (int c = -kPeriodImages; c <= kPeriodImages; ++c) {
          const double y0 = (i - ctr) + static_cast<double>(a) * side;
          const double y1 = (j - ctr) + static_cast<double>(c) * side;
          const double rho = std::hypot(y0, y1);
          const double b = kTwoPi * band_limit * rho;
          rs.b.push_back(b);
          rs.jk.push_back(bessel_j(k, b));
          rs.angular.push_back(std::polar(1.0, k * std::atan2(y1, y0)));
        }
      }
    }
  }
  return rs;
}

std::vector<Complex> image_basis_from_samples(const RadialSamples& rs, int side, int k,
                                              double root) {
  const int per = 2 * kPeriodImages + 1;
  const std::size_t block = static_cast<std::size_t>(per) * per;
  const double jk1 = bessel_j(k + 1, root);
  // F^{-1} psi = -2 pi N gamma^2 i^k R J_{k+1}(R) J_k(b) / (b^2 - R^2) e^{ik theta};
  // positive factors drop out with the renormalization.
  const Complex scale = i_pow(k) * (-root * jk1);
  const double limit = -jk1 / (2.0 * root);  // J_k(b)/(b^2-R^2) as b -> R
  std::vector<Complex> out(static_cast<std::size_t>(side) * side);
  for (std::size_t p = 0; p < out.size(); ++p) {
    Complex acc = 0.0;
    for (std::size_t t = 0; t < block; ++t) {
      const std::size_t s = p * block + t;
      const double den = rs.b[s] * rs.b[s] - root * root;
      const double rad = std::abs(den) < 1e-9 * root * root ? limit : rs.jk[s] / den;
      acc += rad * rs.angular[s];
    }
    out[p] = scale * acc;
  }
  normalize(out);
  return out;
}

}  // namespace

std::vector<Complex> sample_fourier_basis(const PolarSampling& polar, double band_limit, int k,
                                          double root) {
  std::vector<Complex> out(polar.radius.size(), Complex{});
  for (int at : polar.support) {
    const double r = polar.radius[at];
    out[at] = bessel_j(k, root * r / band_limit) * std::polar(1.0, k * polar.angle[at]);
  }
  normalize(out);
  return out;
}

std::vector<Complex> sample_image_basis(int side, double band_limit, int k, double root) {
  return image_basis_from_samples(image_radial_samples(side, band_limit, k), side, k, root);
}

BasisGrid build_basis(const BandLimitSpec& spec, const BesselIndexSet& idx,
                      bool with_image_space) {
  spec.validate();
  BasisGrid grid;
  grid.spec = spec;
  const double gamma = spec.band_limit();
  const int side = spec.image_side;
  grid.polar = polar_sampling(side, gamma);
  grid.block_start.push_back(0);
  for (int k = 0; k <= idx.k_max; ++k) {
    for (int q = 1; q <= idx.p[k]; ++q) grid.functions.push_back({k, q, {}, {}});
    grid.block_start.push_back(static_cast<int>(grid.functions.size()));
  }

#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k <= idx.k_max; ++k) {
    RadialSamples rs;
    if (with_image_space) rs = image_radial_samples(side, gamma, k);
    for (int q = 1; q <= idx.p[k]; ++q) {
      BasisFunction& f = grid.functions[grid.block_start[k] + q - 1];
      const double root = idx.roots[k][q - 1];
      f.fourier = sample_fourier_basis(grid.polar, gamma, k, root);
      if (with_image_space) f.image = image_basis_from_samples(rs, side, k, root);
    }
  }
  return grid;
}

}  // namespace pgmm
