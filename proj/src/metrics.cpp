#include "pgmm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

namespace pgmm {

namespace {

struct Contingency {
  std::vector<std::vector<long long>> n;  // rows: true, cols: predicted
  std::vector<long long> a, b;            // row and column sums
  long long total = 0;
};

std::vector<int> compact(std::span<const int> labels, int& count) {
  std::map<int, int> ids;
  for (int l : labels) {
    if (l < 0) throw Error("metrics: labels must be nonnegative");
    ids.emplace(l, 0);
  }
  int k = 0;
  for (auto& [l, id] : ids) id = k++;
  count = k;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = ids[labels[i]];
  return out;
}

Contingency contingency(std::span<const int> truth, std::span<const int> pred) {
  if (truth.size() != pred.size()) throw Error("metrics: label vectors differ in length");
  if (truth.empty()) throw Error("metrics: empty labelings");
  int R = 0, K = 0;
  const auto t = compact(truth, R);
  const auto p = compact(pred, K);
  Contingency ct;
  ct.n.assign(R, std::vector<long long>(K, 0));
  ct.a.assign(R, 0);
  ct.b.assign(K, 0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    ++ct.n[t[i]][p[i]];
    ++ct.a[t[i]];
    ++ct.b[p[i]];
  }
  ct.total = static_cast<long long>(t.size());
  return ct;
}

double entropy(const std::vector<long long>& counts, long long total) {
  double h = 0.0;
  for (long long c : counts)
    if (c > 0) {
      const double p = static_cast<double>(c) / total;
      h -= p * std::log(p);
    }
  return h;
}

// Minimum-cost perfect assignment on a square matrix (Hungarian method with
// potentials). Returns, for each row, the assigned column.
std::vector<int> hungarian(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace

double accuracy(std::span<const int> truth, std::span<const int> pred) {
  const Contingency ct = contingency(truth, pred);
  const int R = static_cast<int>(ct.a.size()), K = static_cast<int>(ct.b.size());
  const int s = std::max(R, K);
  std::vector<std::vector<double>> cost(s, std::vector<double>(s, 0.0));
  for (int i = 0; i < R; ++i)
    for (int j = 0; j < K; ++j) cost[i][j] = -static_cast<double>(ct.n[i][j]);
  const auto match = hungarian(cost);
  long long hits = 0;
  for (int i = 0; i < R; ++i)
    if (match[i] >= 0 && match[i] < K) hits += ct.n[i][match[i]];
  return static_cast<double>(hits) / ct.total;
}

double adjusted_mutual_information(std::span<const int> truth, std::span<const int> pred) {
  const Contingency ct = contingency(truth, pred);
  const double N = static_cast<double>(ct.total);
  const double hc = entropy(ct.a, ct.total), hk = entropy(ct.b, ct.total);
  if (hc == 0.0 && hk == 0.0) return 1.0;
  if (ct.a.size() == 1 && ct.b.size() == 1) return 1.0;

  double mi = 0.0;
  for (std::size_t i = 0; i < ct.a.size(); ++i)
    for (std::size_t j = 0; j < ct.b.size(); ++j) {
      const double nij = static_cast<double>(ct.n[i][j]);
      if (nij > 0) mi += nij / N * std::log(N * nij / (static_cast<double>(ct.a[i]) * ct.b[j]));
    }

  // Expected MI under the hypergeometric (permutation) model.
  const double lgN1 = std::lgamma(N + 1.0);
  double emi = 0.0;
  for (long long ai : ct.a)
    for (long long bj : ct.b) {
      const double a = static_cast<double>(ai), b = static_cast<double>(bj);
      const double base = std::lgamma(a + 1) + std::lgamma(b + 1) + std::lgamma(N - a + 1) +
                          std::lgamma(N - b + 1) - lgN1;
      const long long lo = std::max<long long>(1, ai + bj - ct.total);
      const long long hi = std::min(ai, bj);
      for (long long k = lo; k <= hi; ++k) {
        const double nij = static_cast<double>(k);
        const double logp = base - std::lgamma(nij + 1) - std::lgamma(a - nij + 1) -
                            std::lgamma(b - nij + 1) - std::lgamma(N - a - b + nij + 1);
        emi += nij / N * std::log(N * nij / (a * b)) * std::exp(logp);
      }
    }
  double denom = 0.5 * (hc + hk) - emi;
  const double eps = std::numeric_limits<double>::epsilon();
  denom = denom < 0 ? std::min(denom, -eps) : std::max(denom, eps);
  return (mi - emi) / denom;
}

HomogeneityCompleteness homogeneity_completeness(std::span<const int> truth, std::span<const int> pred) {
  const Contingency ct = contingency(truth, pred);
  const double N = static_cast<double>(ct.total);
  const double hc = entropy(ct.a, ct.total), hk = entropy(ct.b, ct.total);
  double h_c_given_k = 0.0, h_k_given_c = 0.0;
  for (std::size_t i = 0; i < ct.a.size(); ++i)
    for (std::size_t j = 0; j < ct.b.size(); ++j) {
      const double nij = static_cast<double>(ct.n[i][j]);
      if (nij == 0) continue;
      h_c_given_k -= nij / N * std::log(nij / ct.b[j]);
      h_k_given_c -= nij / N * std::log(nij / ct.a[i]);
    }
  HomogeneityCompleteness out;
  out.h = hc == 0.0 ? 1.0 : 1.0 - h_c_given_k / hc;
  out.c = hk == 0.0 ? 1.0 : 1.0 - h_k_given_c / hk;
  return out;
}

AlignmentErrors relative_alignment_errors(std::span<const Pose> truth_poses,
                                          std::span<const Pose> pred_poses,
                                          std::span<const int> truth, std::span<const int> pred) {
  const std::size_t n = truth.size();
  if (pred.size() != n || truth_poses.size() != n || pred_poses.size() != n)
    throw Error("metrics: alignment records differ in length");
  std::map<std::pair<int, int>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[{truth[i], pred[i]}].push_back(i);
  long double sa = 0.0L, st = 0.0L;
  long long unordered = 0;
  for (const auto& [key, idx] : groups) {
    for (std::size_t x = 0; x < idx.size(); ++x)
      for (std::size_t y = x + 1; y < idx.size(); ++y) {
        const Pose& ti = truth_poses[idx[x]];
        const Pose& tj = truth_poses[idx[y]];
        const Pose& pi = pred_poses[idx[x]];
        const Pose& pj = pred_poses[idx[y]];
        const double da = std::abs(wrap_angle((ti.alpha - tj.alpha) - (pi.alpha - pj.alpha)));
        const Vec2 dt = (ti.t - tj.t) - (pi.t - pj.t);
        sa += static_cast<long double>(da) * da;
        st += static_cast<long double>(dt.row) * dt.row + static_cast<long double>(dt.col) * dt.col;
        ++unordered;
      }
  }
  if (unordered == 0) throw Error("undefined AE-2/TE-2: no jointly assigned pairs");
  AlignmentErrors e;
  e.ae2 = static_cast<double>(std::sqrt(sa / unordered));
  e.te2 = static_cast<double>(std::sqrt(st / unordered));
  e.n_pairs = 2 * unordered;
  return e;
}

MetricReport evaluate(std::span<const int> truth, std::span<const int> pred,
                      std::span<const Pose> truth_poses, std::span<const Pose> pred_poses,
                      bool translation_predicted) {
  MetricReport r;
  r.acc = accuracy(truth, pred);
  r.ami = adjusted_mutual_information(truth, pred);
  const auto hc = homogeneity_completeness(truth, pred);
  r.h = hc.h;
  r.c = hc.c;
  try {
    const AlignmentErrors e = relative_alignment_errors(truth_poses, pred_poses, truth, pred);
    r.ae2 = e.ae2;
    if (translation_predicted) r.te2 = e.te2;
    r.n_pairs = e.n_pairs;
  } catch (const Error&) {
    r.n_pairs = 0;
  }
  return r;
}

std::string format_metric(const std::string& name, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return name + "\t" + buf;
}

void write_report(std::ostream& os, const MetricReport& r) {
  os << format_metric("ACC", r.acc) << '\n';
  os << format_metric("AMI", r.ami) << '\n';
  os << format_metric("H", r.h) << '\n';
  os << format_metric("C", r.c) << '\n';
  os << (r.ae2 ? format_metric("AE2", *r.ae2) : std::string("AE2\tNA")) << '\n';
  os << (r.te2 ? format_metric("TE2", *r.te2) : std::string("TE2\tNA")) << '\n';
  os << "N_PAIRS\t" << r.n_pairs << '\n';
}

}  // namespace pgmm
