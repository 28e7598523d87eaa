#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "pgmm/metrics.hpp"

using namespace pgmm;

namespace {

std::vector<int> random_labels(std::mt19937_64& rng, int n, int k) {
  std::uniform_int_distribution<int> u(0, k - 1);
  std::vector<int> v(n);
  for (int& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST_CASE("accuracy hand cases") {
  const std::vector<int> c = {0, 0, 1, 1};
  CHECK(accuracy(c, c) == 1.0);
  CHECK(accuracy(c, std::vector<int>{1, 1, 0, 0}) == 1.0);
  CHECK(accuracy(c, std::vector<int>{0, 1, 0, 1}) == 0.5);
  CHECK(accuracy(c, std::vector<int>{0, 1, 2, 3}) == 0.5);
  CHECK_THROWS_AS(accuracy(c, std::vector<int>{0, 1}), Error);
  CHECK_THROWS_AS(accuracy(c, std::vector<int>{0, 1, -1, 0}), Error);
}

TEST_CASE("accuracy equals the permutation brute force") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 5 + trial % 30;
    const auto t = random_labels(rng, n, 1 + trial % 5);
    const auto p = random_labels(rng, n, 1 + (trial / 5) % 5);
    CHECK(accuracy(t, p) == doctest::Approx(oracle::accuracy_bruteforce(t, p)).epsilon(1e-15));
  }
}

TEST_CASE("AMI, homogeneity and completeness hand cases") {
  const std::vector<int> c = {0, 0, 0, 1, 1, 1}, k = {0, 0, 1, 1, 2, 2};
  CHECK(adjusted_mutual_information(c, c) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(adjusted_mutual_information(c, std::vector<int>(6, 0)) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(adjusted_mutual_information(c, k) == doctest::Approx(oracle::ami(c, k)).epsilon(1e-9));
  const auto hc = homogeneity_completeness(c, k);
  const auto want = oracle::homogeneity_completeness(c, k);
  CHECK(hc.h == doctest::Approx(want.first).epsilon(1e-9));
  CHECK(hc.c == doctest::Approx(want.second).epsilon(1e-9));
  const auto flat = homogeneity_completeness(std::vector<int>{0, 0, 1, 1}, std::vector<int>(4, 0));
  CHECK(flat.h == doctest::Approx(0.0).scale(1.0));
  CHECK(flat.c == 1.0);
  CHECK(adjusted_mutual_information(std::vector<int>(4, 2), std::vector<int>(4, 0)) == 1.0);
}

TEST_CASE("AMI, h and c match the direct-formula oracles on random pairs") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 6 + trial % 40;
    const auto t = random_labels(rng, n, 2 + trial % 4);
    const auto p = random_labels(rng, n, 2 + (trial / 4) % 4);
    const double want = oracle::ami(t, p);
    CHECK(std::abs(adjusted_mutual_information(t, p) - want) <= 1e-9 * std::max(1.0, std::abs(want)));
    CHECK(std::abs(adjusted_mutual_information(t, p) - adjusted_mutual_information(p, t)) <= 1e-12);
    const auto hc = homogeneity_completeness(t, p);
    const auto o = oracle::homogeneity_completeness(t, p);
    CHECK(std::abs(hc.h - o.first) <= 1e-9);
    CHECK(std::abs(hc.c - o.second) <= 1e-9);
  }
}

TEST_CASE("metrics ignore relabeling") {
  std::mt19937_64 rng(3);
  const auto t = random_labels(rng, 40, 4), p = random_labels(rng, 40, 3);
  std::vector<int> t2 = t, p2 = p;
  for (int& x : t2) x = (x + 2) % 4 + 10;
  for (int& x : p2) x = 2 - x;
  CHECK(accuracy(t2, p2) == accuracy(t, p));
  CHECK(adjusted_mutual_information(t2, p2) == doctest::Approx(adjusted_mutual_information(t, p)).epsilon(1e-12));
}

TEST_CASE("relative alignment errors match the pairwise oracle") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ua(-kPi, kPi), ut(-8, 8);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + trial * 3;
    const auto lt = random_labels(rng, n, 2), lp = random_labels(rng, n, 2);
    std::vector<Pose> tp(n), pp(n);
    std::vector<oracle::PoseRow> to(n), po(n);
    for (int i = 0; i < n; ++i) {
      tp[i] = {ua(rng), {ut(rng), ut(rng)}};
      pp[i] = {ua(rng), {ut(rng), ut(rng)}};
      to[i] = {tp[i].alpha, tp[i].t.row, tp[i].t.col};
      po[i] = {pp[i].alpha, pp[i].t.row, pp[i].t.col};
    }
    bool any = false;
    for (int i = 0; i < n && !any; ++i)
      for (int j = 0; j < i; ++j)
        if (lt[i] == lt[j] && lp[i] == lp[j]) any = true;
    if (!any) {
      CHECK_THROWS_WITH_AS(relative_alignment_errors(tp, pp, lt, lp), doctest::Contains("undefined AE-2/TE-2"), Error);
      continue;
    }
    const auto e = relative_alignment_errors(tp, pp, lt, lp);
    const auto [ae, te] = oracle::relative_errors(to, po, lt, lp);
    CHECK(std::abs(e.ae2 - ae) <= 1e-12);
    CHECK(std::abs(e.te2 - te) <= 1e-12);
    CHECK(e.n_pairs % 2 == 0);
  }
}

TEST_CASE("relative errors: perfect poses, common offsets and no joint pairs") {
  const std::vector<int> l = {0, 0, 1, 1, 1};
  std::vector<Pose> truth = {{0.1, {1, 2}}, {2.0, {-3, 0}}, {-3.0, {0, 0}}, {1.0, {4, 4}}, {0.5, {-1, 5}}};
  auto e = relative_alignment_errors(truth, truth, l, l);
  CHECK(e.ae2 == 0.0);
  CHECK(e.te2 == 0.0);
  CHECK(e.n_pairs == 2 * (1 + 3));
  std::vector<Pose> shifted = truth;
  for (auto& p : shifted) {
    p.alpha = wrap_angle(p.alpha + 2.5);
    p.t = p.t + Vec2{3.0, -7.0};
  }
  e = relative_alignment_errors(truth, shifted, l, l);
  CHECK(e.ae2 <= 1e-12);
  CHECK(e.te2 <= 1e-12);
  const std::vector<int> distinct = {0, 1, 2, 3, 4};
  CHECK_THROWS_WITH_AS(relative_alignment_errors(truth, truth, distinct, distinct),
                       doctest::Contains("undefined AE-2/TE-2"), Error);
}

TEST_CASE("report formatting") {
  MetricReport r;
  r.acc = 0.123456789012;
  r.ami = 1.0;
  r.ae2 = 0.05;
  r.n_pairs = 12;
  std::ostringstream os;
  write_report(os, r);
  const std::string s = os.str();
  CHECK(s.find("ACC\t0.123456789\n") != std::string::npos);
  CHECK(s.find("TE2\tNA\n") != std::string::npos);
  CHECK(s.find("AE2\t0.05\n") != std::string::npos);
  CHECK(s.find("N_PAIRS\t12\n") != std::string::npos);
}
