#include "pgmm/em_center.hpp"

#include <algorithm>
#include <cmath>

namespace pgmm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

struct Normalized {
  std::vector<double> c;
  bool degenerate = false;
};

Normalized min_max_normalize(const Image& image) {
  Normalized out;
  const auto [lo, hi] = std::minmax_element(image.vec().begin(), image.vec().end());
  const double span = *hi - *lo;
  if (!(span > 1e-12 * std::max(1.0, std::abs(*hi)))) {
    out.degenerate = true;
    return out;
  }
  out.c.resize(image.size());
  for (std::size_t p = 0; p < image.size(); ++p) out.c[p] = (image[p] - *lo) / span;
  return out;
}

double median_of(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + mid));
  return m;
}

CenteringParams init_from_normalized(const std::vector<double>& c, int side) {
  CenteringParams p;
  const double med = median_of(c);
  double w_sum = 0.0, wr = 0.0, wc = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double w = 1.0 - c[i];
    w_sum += w;
    wr += w * static_cast<double>(static_cast<int>(i) / side);
    wc += w * static_cast<double>(static_cast<int>(i) % side);
    mean += c[i];
  }
  mean /= static_cast<double>(c.size());
  double var = 0.0;
  for (double v : c) var += (v - mean) * (v - mean);
  var /= static_cast<double>(c.size());

  // Signal intensity from the darkest decile: when the flat background covers
  // most of the frame the median is the background level itself.
  std::vector<double> sorted = c;
  const std::size_t k = std::max<std::size_t>(1, sorted.size() / 10);
  std::partial_sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k), sorted.end());
  double lo_sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) lo_sum += sorted[i];
  const double mu_i = lo_sum / static_cast<double>(k);
  const double var_i = std::max(var, 1e-12);
  const double spread = side / 8.0;

  p.mu_s = {wr / w_sum, wc / w_sum, mu_i};
  p.sigma_s = Eigen::Matrix3d::Zero();
  p.sigma_s(0, 0) = spread * spread;
  p.sigma_s(1, 1) = spread * spread;
  p.sigma_s(2, 2) = var_i;
  p.mu_b = med;
  p.sigma_b = std::sqrt(var_i);
  return p;
}

}  // namespace

CenteringParams initial_centering_params(const Image& image) {
  const Normalized n = min_max_normalize(image);
  if (n.degenerate) return {};
  return init_from_normalized(n.c, image.side());
}

CenterFit fit_center(const Image& image, int n_citer, const std::optional<CenteringParams>& init) {
  if (n_citer < 1) throw Error("fit_center: n_citer must be >= 1");
  const int L = image.side();
  const double ctr = frame_center(L);
  CenterFit fit;
  const Normalized norm = min_max_normalize(image);
  if (norm.degenerate) {
    fit.center = {ctr, ctr};
    fit.degenerate = true;
    return fit;
  }
  const std::vector<double>& c = norm.c;
  const std::size_t n = c.size();
  CenteringParams th = init ? *init : init_from_normalized(c, L);
  const double log_area = 2.0 * std::log(static_cast<double>(L));
  std::vector<double> gamma(n);

  for (int it = 0;; ++it) {
    // E-step and observed-data log-likelihood of the current parameters.
    Eigen::LLT<Eigen::Matrix3d> llt(th.sigma_s);
    if (llt.info() != Eigen::Success) break;
    const Eigen::Matrix3d lmat = llt.matrixL();
    const double log_det = 2.0 * lmat.diagonal().array().log().sum();
    const double ls0 = -0.5 * (3.0 * kLog2Pi + log_det);
    const double lb0 = -0.5 * kLog2Pi - std::log(th.sigma_b) - log_area;
    long double ll = 0.0L;
    for (std::size_t p = 0; p < n; ++p) {
      const Eigen::Vector3d x(static_cast<double>(p / L), static_cast<double>(p % L), c[p]);
      const Eigen::Vector3d y = lmat.triangularView<Eigen::Lower>().solve(x - th.mu_s);
      const double ls = ls0 - 0.5 * y.squaredNorm();
      const double zb = (c[p] - th.mu_b) / th.sigma_b;
      const double lb = lb0 - 0.5 * zb * zb;
      const double hi = std::max(ls, lb);
      ll += hi + std::log(0.5 * std::exp(ls - hi) + 0.5 * std::exp(lb - hi));
      gamma[p] = 1.0 / (1.0 + std::exp(lb - ls));
    }
    fit.loglik.push_back(static_cast<double>(ll));
    if (it == n_citer) break;

    // M-step.
    double ns = 0.0, nb = 0.0;
    Eigen::Vector3d ms = Eigen::Vector3d::Zero();
    double mb = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      const Eigen::Vector3d x(static_cast<double>(p / L), static_cast<double>(p % L), c[p]);
      ns += gamma[p];
      ms += gamma[p] * x;
      nb += 1.0 - gamma[p];
      mb += (1.0 - gamma[p]) * c[p];
    }
    if (ns < 1e-8 || nb < 1e-8) break;
    ms /= ns;
    mb /= nb;
    // Positional covariance of the signal; one intensity variance shared by
    // both components, so responsibility is monotone in darkness.
    Eigen::Matrix2d sp = Eigen::Matrix2d::Zero();
    double vi = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      const Eigen::Vector2d d(static_cast<double>(p / L) - ms[0], static_cast<double>(p % L) - ms[1]);
      sp += gamma[p] * d * d.transpose();
      vi += gamma[p] * (c[p] - ms[2]) * (c[p] - ms[2]) + (1.0 - gamma[p]) * (c[p] - mb) * (c[p] - mb);
    }
    sp /= ns;
    vi = std::max(vi / static_cast<double>(n), 1e-12);
    Eigen::Matrix3d ss = Eigen::Matrix3d::Zero();
    ss.topLeftCorner<2, 2>() = sp;
    ss(2, 2) = vi;
    ss.diagonal().array() += 1e-6 * ss.trace() / 3.0;
    th.mu_s = ms;
    th.sigma_s = ss;
    th.mu_b = mb;
    th.sigma_b = std::sqrt(vi);
  }
  fit.params = th;
  fit.center = {th.mu_s[0], th.mu_s[1]};
  fit.offset = fit.center - Vec2{ctr, ctr};
  return fit;
}

Image gaussian_smooth(const Image& image, double sigma) {
  if (!(sigma > 0.0)) return image;
  const int L = image.side();
  const int h = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * h + 1);
  double z = 0.0;
  for (int i = -h; i <= h; ++i) z += k[i + h] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (double& v : k) v /= z;
  Image tmp(L), out(L);
  for (int r = 0; r < L; ++r)
    for (int c = 0; c < L; ++c) {
      double a = 0.0;
      for (int i = -h; i <= h; ++i) a += k[i + h] * image(r, std::clamp(c + i, 0, L - 1));
      tmp(r, c) = a;
    }
  for (int r = 0; r < L; ++r)
    for (int c = 0; c < L; ++c) {
      double a = 0.0;
      for (int i = -h; i <= h; ++i) a += k[i + h] * tmp(std::clamp(r + i, 0, L - 1), c);
      out(r, c) = a;
    }
  return out;
}

CenteredStack center_stack(const ImageStack& images, int n_citer, double smoothing) {
  if (images.empty()) throw Error("center_stack: empty stack");
  const int n = static_cast<int>(images.size());
  CenteredStack out;
  out.images.resize(n);
  out.shifts.resize(n);
  out.degenerate.assign(n, false);
  std::vector<char> degen(n, 0);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    const CenterFit f = fit_center(gaussian_smooth(images[i], smoothing), n_citer);
    const Vec2 s = f.degenerate ? Vec2{} : f.offset;
    out.shifts[i] = s;
    degen[i] = f.degenerate ? 1 : 0;
    out.images[i] = shift_image(images[i], -s);
  }
  for (int i = 0; i < n; ++i) out.degenerate[i] = degen[i] != 0;
  return out;
}

}  // namespace pgmm
