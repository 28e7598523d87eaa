#include "pgmm/polargmm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "binary_io.hpp"
#include "pgmm/random.hpp"

namespace pgmm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double normalizer(const ClusterParams& M) {
  double s = 0.0;
  for (int j = 0; j < M.m(); ++j) s += std::log(M.sigma_r[j]) + std::log(M.sigma_phi[j]);
  return -s - M.m() * kLog2Pi;
}

void check_dims(const PolarCoeff& sample, const ClusterParams& M) {
  if (static_cast<int>(sample.size()) != M.m()) throw Error("polargmm: sample dimension mismatch");
}

}  // namespace

double circular_difference(double a, double b) { return wrap_angle(a - b); }

double cluster_logpdf(const PolarCoeff& sample, const ClusterParams& M) {
  check_dims(sample, M);
  double e = 0.0;
  for (int j = 0; j < M.m(); ++j) {
    const double dr = (sample.r[j] - M.mu_r[j]) / M.sigma_r[j];
    const double dp = circular_difference(sample.phi[j], M.mu_phi[j]) / M.sigma_phi[j];
    e += 0.5 * (dr * dr + dp * dp);
  }
  return normalizer(M) - e;
}

namespace {

double log_sum_exp(std::span<const double> v) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double x : v) hi = std::max(hi, x);
  if (!std::isfinite(hi)) return hi;
  double s = 0.0;
  for (double x : v) s += std::exp(x - hi);
  return hi + std::log(s);
}

std::vector<double> weighted_logpdfs(const PolarCoeff& sample, const MixtureParams& theta) {
  std::vector<double> l(theta.C());
  for (int c = 0; c < theta.C(); ++c)
    l[c] = std::log(theta.pi[c]) + cluster_logpdf(sample, theta.clusters[c]);
  return l;
}

}  // namespace

double mixture_logpdf(const PolarCoeff& sample, const MixtureParams& theta) {
  return log_sum_exp(weighted_logpdfs(sample, theta));
}

double log_likelihood(std::span<const PolarCoeff> samples, const MixtureParams& theta) {
  const int n = static_cast<int>(samples.size());
  std::vector<double> per(n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) per[i] = mixture_logpdf(samples[i], theta);
  long double s = 0.0L;
  for (double v : per) s += v;
  return static_cast<double>(s);
}

Responsibilities e_step(std::span<const PolarCoeff> samples, const MixtureParams& theta) {
  if (samples.empty()) throw Error("e_step: empty batch");
  const int n = static_cast<int>(samples.size());
  const int C = theta.C();
  Responsibilities out;
  out.w.resize(n, C);
  std::vector<char> flagged(n, 0);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    const std::vector<double> l = weighted_logpdfs(samples[i], theta);
    const double hi = *std::max_element(l.begin(), l.end());
    if (!std::isfinite(hi)) {
      out.w.row(i).setConstant(1.0 / C);
      flagged[i] = 1;
      continue;
    }
    double s = 0.0;
    for (int c = 0; c < C; ++c) s += std::exp(l[c] - hi);
    for (int c = 0; c < C; ++c) out.w(i, c) = std::exp(l[c] - hi) / s;
  }
  for (int i = 0; i < n; ++i)
    if (flagged[i]) out.underflow_rows.push_back(i);
  return out;
}

double weighted_circular_mean(std::span<const double> phi, std::span<const double> w) {
  if (phi.size() != w.size()) throw Error("weighted_circular_mean: length mismatch");
  // F(mu) = sum w (mu - u_i)^2 with u_i the representative of phi_i in
  // [mu - pi, mu + pi). Sweeping mu over [0, 2pi), u_i jumps by 2pi when mu
  // passes the antipode u_i + pi; between jumps F is a quadratic in mu.
  struct Item {
    double u, w, antipode;
  };
  std::vector<Item> items;
  items.reserve(phi.size());
  double W = 0.0, S = 0.0, Q = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    if (!(w[i] > 0.0)) continue;
    double u = wrap_angle(phi[i]);
    if (u >= kPi) u -= kTwoPi;
    items.push_back({u, w[i], u + kPi});
    W += w[i];
    S += w[i] * u;
    Q += w[i] * u * u;
  }
  if (items.empty()) return 0.0;
  std::sort(items.begin(), items.end(),
            [](const Item& a, const Item& b) { return a.antipode < b.antipode; });
  double best_mu = 0.0;
  double best_f = std::numeric_limits<double>::infinity();
  double lo = 0.0;
  for (std::size_t k = 0; k <= items.size(); ++k) {
    const double hi = k < items.size() ? items[k].antipode : kTwoPi;
    if (hi >= lo) {
      const double mu = std::clamp(S / W, lo, hi);
      const double f = W * mu * mu - 2.0 * mu * S + Q;
      if (f < best_f) {
        best_f = f;
        best_mu = mu;
      }
    }
    if (k == items.size()) break;
    Item& it = items[k];
    S += kTwoPi * it.w;
    Q += it.w * (4.0 * kPi * it.u + 4.0 * kPi * kPi);
    it.u += kTwoPi;
    lo = hi;
  }
  return wrap_angle(best_mu);
}

namespace {

double median_r(std::span<const PolarCoeff> samples) {
  std::vector<double> all;
  for (const auto& s : samples) all.insert(all.end(), s.r.begin(), s.r.end());
  if (all.empty()) return 0.0;
  const std::size_t mid = all.size() / 2;
  std::nth_element(all.begin(), all.begin() + mid, all.end());
  return all[mid];
}

ClusterParams weighted_cluster(std::span<const PolarCoeff> samples, const Eigen::VectorXd& w,
                               double floor_r) {
  const int n = static_cast<int>(samples.size());
  const int m = static_cast<int>(samples.front().size());
  const double W = w.sum();
  ClusterParams M;
  M.mu_r.resize(m);
  M.mu_phi.resize(m);
  M.sigma_r.resize(m);
  M.sigma_phi.resize(m);
  std::vector<double> phi(n), ww(n);
  for (int i = 0; i < n; ++i) ww[i] = w[i];
  for (int j = 0; j < m; ++j) {
    double sr = 0.0;
    for (int i = 0; i < n; ++i) sr += w[i] * samples[i].r[j];
    const double mr = sr / W;
    double vr = 0.0, vp = 0.0;
    for (int i = 0; i < n; ++i) {
      phi[i] = samples[i].phi[j];
      const double d = samples[i].r[j] - mr;
      vr += w[i] * d * d;
    }
    const double mp = weighted_circular_mean(phi, ww);
    for (int i = 0; i < n; ++i) {
      const double d = circular_difference(phi[i], mp);
      vp += w[i] * d * d;
    }
    M.mu_r[j] = mr;
    M.mu_phi[j] = mp;
    M.sigma_r[j] = std::max(std::sqrt(vr / W), floor_r);
    M.sigma_phi[j] = std::max(std::sqrt(vp / W), kSigmaPhiFloor);
  }
  return M;
}

}  // namespace

MixtureParams m_step(std::span<const PolarCoeff> samples, const Responsibilities& resp) {
  const int n = static_cast<int>(samples.size());
  if (n == 0 || resp.w.rows() != n) throw Error("m_step: responsibilities do not match batch");
  const int C = static_cast<int>(resp.w.cols());
  const double med = median_r(samples);
  const double floor_r = med > 0.0 ? kSigmaRFloorFactor * med : 1e-12;

  MixtureParams theta;
  theta.pi.resize(C);
  theta.clusters.resize(C);
  std::vector<int> empty;
  for (int c = 0; c < C; ++c)
    if (resp.w.col(c).sum() < 1e-8) empty.push_back(c);

#pragma omp parallel for schedule(dynamic)
  for (int c = 0; c < C; ++c) {
    const Eigen::VectorXd w = resp.w.col(c);
    const double N = w.sum();
    if (N < 1e-8) continue;
    theta.pi[c] = N / n;
    theta.clusters[c] = weighted_cluster(samples, w, floor_r);
  }

  if (!empty.empty()) {
    // Re-center each empty cluster on a poorly explained sample, with the
    // spread of the whole batch.
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> best(n);
    for (int i = 0; i < n; ++i) best[i] = resp.w.row(i).maxCoeff();
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return best[a] < best[b]; });
    const ClusterParams global = weighted_cluster(samples, Eigen::VectorXd::Ones(n), floor_r);
    for (std::size_t e = 0; e < empty.size(); ++e) {
      const PolarCoeff& s = samples[order[e % n]];
      ClusterParams M = global;
      M.mu_r = s.r;
      M.mu_phi = s.phi;
      theta.clusters[empty[e]] = std::move(M);
      theta.pi[empty[e]] = 1.0 / n;
    }
    const double tot = std::accumulate(theta.pi.begin(), theta.pi.end(), 0.0);
    for (double& p : theta.pi) p /= tot;
  }
  return theta;
}

MixtureParams fit_batch(std::span<const PolarCoeff> samples, const MixtureParams& theta0,
                        int n_inner, std::vector<double>* trace) {
  MixtureParams theta = theta0;
  if (trace) trace->push_back(log_likelihood(samples, theta));
  for (int it = 0; it < n_inner; ++it) {
    theta = m_step(samples, e_step(samples, theta));
    if (trace) trace->push_back(log_likelihood(samples, theta));
  }
  return theta;
}

namespace {

struct KMeans {
  std::vector<int> label;
  double inertia = 0.0;
};

// One k-means++ seeding followed by Lloyd iterations on the rows of feat.
KMeans lloyd(const Eigen::MatrixXd& feat, int C, std::mt19937_64& rng) {
  const int n = static_cast<int>(feat.rows());
  Eigen::MatrixXd centers(C, feat.cols());
  centers.row(0) = feat.row(std::min(n - 1, static_cast<int>(uniform01(rng) * n)));
  Eigen::VectorXd d2 = (feat.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < C; ++c) {
    const double total = d2.sum();
    int pick = std::min(n - 1, static_cast<int>(uniform01(rng) * n));
    if (total > 0.0) {
      const double u = uniform01(rng) * total;
      double acc = 0.0;
      pick = n - 1;
      for (int i = 0; i < n; ++i) {
        acc += d2[i];
        if (u < acc) {
          pick = i;
          break;
        }
      }
    }
    centers.row(c) = feat.row(pick);
    d2 = d2.cwiseMin((feat.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }
  KMeans km;
  km.label.assign(n, -1);
  for (int it = 0; it < 100; ++it) {
    bool changed = false;
    km.inertia = 0.0;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (int c = 0; c < C; ++c) {
        const double d = (feat.row(i) - centers.row(c)).squaredNorm();
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      km.inertia += bd;
      if (km.label[i] != best) changed = true;
      km.label[i] = best;
    }
    if (!changed) break;
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(C, feat.cols());
    std::vector<int> count(C, 0);
    for (int i = 0; i < n; ++i) {
      sum.row(km.label[i]) += feat.row(i);
      ++count[km.label[i]];
    }
    // Empty clusters keep their previous center.
    for (int c = 0; c < C; ++c)
      if (count[c] > 0) centers.row(c) = sum.row(c) / count[c];
  }
  return km;
}

}  // namespace

MixtureParams init_kmeanspp(std::span<const PolarCoeff> samples, int C, std::uint64_t seed) {
  const int n = static_cast<int>(samples.size());
  if (C < 1) throw Error("init: C must be >= 1");
  if (n < C) throw Error("init: C = " + std::to_string(C) + " exceeds sample count " + std::to_string(n));
  const int m = static_cast<int>(samples.front().size());
  // Magnitudes do not change under rotation, so unaligned images of one
  // class share them while their phases are scattered.
  Eigen::MatrixXd feat(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) feat(i, j) = samples[i].r[j];
  std::mt19937_64 rng(stream_seed(seed, 0x6b6d6561ULL));
  KMeans best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < kInitRestarts; ++restart) {
    KMeans km = lloyd(feat, C, rng);
    if (km.inertia < best.inertia) best = std::move(km);
  }
  Responsibilities resp;
  resp.w = Eigen::MatrixXd::Zero(n, C);
  for (int i = 0; i < n; ++i) resp.w(i, best.label[i]) = 1.0;
  return m_step(samples, resp);
}

namespace {
constexpr char kMixtureMagic[] = "PGMMTH1";  // 7 chars + NUL = 8 bytes
}

void save_mixture(const MixtureParams& theta, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path + " for writing");
  detail::write_magic(os, kMixtureMagic);
  detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(theta.C()));
  detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(theta.m()));
  for (double p : theta.pi) detail::write_le<double>(os, p);
  for (const auto& M : theta.clusters) {
    for (const auto* v : {&M.mu_r, &M.mu_phi, &M.sigma_r, &M.sigma_phi})
      for (double x : *v) detail::write_le<double>(os, x);
  }
  if (!os) throw Error("write failed: " + path);
}

MixtureParams load_mixture(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path);
  const std::string what = "mixture " + path;
  detail::expect_magic(is, kMixtureMagic, what);
  const int C = static_cast<int>(detail::read_le<std::uint32_t>(is, what));
  const int m = static_cast<int>(detail::read_le<std::uint32_t>(is, what));
  if (C < 1 || m < 1 || C > 1 << 20 || m > 1 << 20) throw Error(what + ": implausible header");
  MixtureParams theta;
  theta.pi.resize(C);
  for (double& p : theta.pi) p = detail::read_le<double>(is, what);
  theta.clusters.resize(C);
  for (auto& M : theta.clusters) {
    for (auto* v : {&M.mu_r, &M.mu_phi, &M.sigma_r, &M.sigma_phi}) {
      v->resize(m);
      for (double& x : *v) x = detail::read_le<double>(is, what);
    }
  }
  return theta;
}

}  // namespace pgmm
