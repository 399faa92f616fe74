#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "groupfs/eval.hpp"
#include "groupfs/rng.hpp"

using groupfs::Mat;
using groupfs::Rng;
namespace eval = groupfs::eval;

namespace {

std::vector<int> random_partition(Rng& rng, int n, int max_labels) {
  std::vector<int> p(n);
  for (int i = 0; i < n; ++i) p[i] = static_cast<int>(rng.below(max_labels));
  return p;
}

// Exhaustive pair-count ARI oracle.
double ari_oracle(const std::vector<int>& a, const std::vector<int>& b) {
  const int n = static_cast<int>(a.size());
  double n11 = 0, n00 = 0, n10 = 0, n01 = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const bool sa = a[i] == a[j], sb = b[i] == b[j];
      if (sa && sb) n11++;
      else if (!sa && !sb) n00++;
      else if (sa) n10++;
      else n01++;
    }
  const double den = (n11 + n10) * (n10 + n00) + (n11 + n01) * (n01 + n00);
  if (den == 0.0) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if ((a[i] == a[j]) != (b[i] == b[j])) return 0.0;
    return 1.0;
  }
  return 2.0 * (n11 * n00 - n10 * n01) / den;
}

// Greedy confusion-matrix matching, for the Hungarian >= greedy property.
double greedy_accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
  const int kp = 1 + *std::max_element(pred.begin(), pred.end());
  const int kt = 1 + *std::max_element(truth.begin(), truth.end());
  Mat conf(kp, kt);
  for (size_t i = 0; i < pred.size(); ++i) conf(pred[i], truth[i]) += 1.0;
  std::vector<bool> used_p(kp, false), used_t(kt, false);
  double hits = 0.0;
  for (int step = 0; step < std::min(kp, kt); ++step) {
    double best = -1.0;
    int bi = -1, bj = -1;
    for (int i = 0; i < kp; ++i)
      for (int j = 0; j < kt; ++j)
        if (!used_p[i] && !used_t[j] && conf(i, j) > best) {
          best = conf(i, j);
          bi = i;
          bj = j;
        }
    used_p[bi] = used_t[bj] = true;
    hits += best;
  }
  return hits / static_cast<double>(pred.size());
}

}  // namespace

TEST_CASE("kmeans basics") {
  Rng rng(17);
  SUBCASE("k=1 inertia is the total squared deviation from the mean") {
    const Mat X = rng.normal_mat(40, 3);
    const eval::KMeansResult km = eval::kmeans(X, 1, 0);
    double expect = 0.0;
    for (int j = 0; j < 3; ++j) {
      double mean = 0.0;
      for (int i = 0; i < 40; ++i) mean += X(i, j);
      mean /= 40;
      for (int i = 0; i < 40; ++i) expect += (X(i, j) - mean) * (X(i, j) - mean);
    }
    CHECK(km.inertia == doctest::Approx(expect).epsilon(1e-10));
  }
  SUBCASE("two separated blobs are recovered") {
    Mat X(30, 2);
    for (int i = 0; i < 15; ++i) {
      X(i, 0) = rng.normal();
      X(i, 1) = rng.normal();
      X(15 + i, 0) = 50.0 + rng.normal();
      X(15 + i, 1) = 50.0 + rng.normal();
    }
    const eval::KMeansResult km = eval::kmeans(X, 2, 1, 5);
    for (int i = 1; i < 15; ++i) CHECK(km.labels[i] == km.labels[0]);
    for (int i = 16; i < 30; ++i) CHECK(km.labels[i] == km.labels[15]);
    CHECK(km.labels[0] != km.labels[15]);
  }
  SUBCASE("k = N gives zero inertia on distinct points") {
    Mat X(6, 1);
    for (int i = 0; i < 6; ++i) X(i, 0) = 3.0 * i;
    const eval::KMeansResult km = eval::kmeans(X, 6, 2, 3);
    CHECK(km.inertia == doctest::Approx(0.0));
  }
  SUBCASE("k > N rejected") {
    CHECK_THROWS_AS(eval::kmeans(Mat(3, 2), 4, 0), std::invalid_argument);
  }
}

TEST_CASE("clustering_accuracy") {
  SUBCASE("identity and permutation relabelings score 1") {
    Rng rng(19);
    const std::vector<int> truth = random_partition(rng, 60, 4);
    CHECK(eval::clustering_accuracy(truth, truth) == doctest::Approx(1.0));
    for (int rep = 0; rep < 50; ++rep) {
      const std::vector<int> perm = rng.permutation(4);
      std::vector<int> relabeled(truth.size());
      for (size_t i = 0; i < truth.size(); ++i) relabeled[i] = perm[truth[i]];
      CHECK(eval::clustering_accuracy(relabeled, truth) == doctest::Approx(1.0));
    }
  }
  SUBCASE("balanced binary with one half flipped scores 0.5") {
    // truth: 0 x 10, 1 x 10; pred agrees on the first half of each class and
    // flips the second half. Brute force over both label matchings gives 0.5.
    std::vector<int> truth(20, 0), pred(20, 0);
    for (int i = 10; i < 20; ++i) truth[i] = 1;
    for (int i = 0; i < 20; ++i) pred[i] = (i % 10 < 5) ? truth[i] : 1 - truth[i];
    double best = 0.0;
    for (int flip = 0; flip < 2; ++flip) {
      int hits = 0;
      for (int i = 0; i < 20; ++i) hits += ((pred[i] ^ flip) == truth[i]);
      best = std::max(best, hits / 20.0);
    }
    CHECK(best == doctest::Approx(0.5));
    CHECK(eval::clustering_accuracy(pred, truth) == doctest::Approx(0.5));
  }
  SUBCASE("Hungarian matching is at least as good as greedy") {
    Rng rng(23);
    for (int rep = 0; rep < 100; ++rep) {
      const int n = 12 + static_cast<int>(rng.below(20));
      const std::vector<int> truth = random_partition(rng, n, 4);
      const std::vector<int> pred = random_partition(rng, n, 5);
      CHECK(eval::clustering_accuracy(pred, truth) >= greedy_accuracy(pred, truth) - 1e-12);
    }
  }
  SUBCASE("permutation invariance of the pred side") {
    Rng rng(29);
    const std::vector<int> truth = random_partition(rng, 40, 3);
    const std::vector<int> pred = random_partition(rng, 40, 3);
    const double base = eval::clustering_accuracy(pred, truth);
    for (int rep = 0; rep < 20; ++rep) {
      const std::vector<int> perm = rng.permutation(3);
      std::vector<int> relabeled(pred.size());
      for (size_t i = 0; i < pred.size(); ++i) relabeled[i] = perm[pred[i]];
      CHECK(eval::clustering_accuracy(relabeled, truth) == doctest::Approx(base));
    }
  }
}

TEST_CASE("ari") {
  SUBCASE("identical partitions give 1") {
    Rng rng(31);
    const std::vector<int> p = random_partition(rng, 30, 3);
    CHECK(eval::ari(p, p) == doctest::Approx(1.0));
  }
  SUBCASE("single-cluster pred vs multi-cluster truth gives 0") {
    const std::vector<int> pred(12, 0);
    std::vector<int> truth(12);
    for (int i = 0; i < 12; ++i) truth[i] = i % 3;
    CHECK(eval::ari(pred, truth) == doctest::Approx(0.0));
  }
  SUBCASE("six-point case matches the pair-count oracle") {
    const std::vector<int> a = {0, 0, 1, 1, 2, 2};
    const std::vector<int> b = {0, 0, 0, 1, 1, 1};
    CHECK(eval::ari(a, b) == doctest::Approx(ari_oracle(a, b)).epsilon(1e-14));
  }
  SUBCASE("200 random 8-point partition pairs match the oracle exactly") {
    Rng rng(37);
    for (int rep = 0; rep < 200; ++rep) {
      const std::vector<int> a = random_partition(rng, 8, 1 + static_cast<int>(rng.below(4)));
      const std::vector<int> b = random_partition(rng, 8, 1 + static_cast<int>(rng.below(4)));
      CHECK(eval::ari(a, b) == ari_oracle(a, b));
    }
  }
}

TEST_CASE("rg_sim") {
  const std::vector<std::vector<int>> truth = {{0, 1, 2, 3, 4}, {5, 6, 7, 8, 9}};
  SUBCASE("exact recovery scores 1") {
    std::vector<std::vector<int>> pred = truth;
    pred.push_back({10, 11});  // pure-noise group is filtered out
    CHECK(eval::rg_sim(truth, pred) == doctest::Approx(1.0));
  }
  SUBCASE("merged informative groups score 0.5") {
    const std::vector<std::vector<int>> pred = {{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}};
    CHECK(eval::rg_sim(truth, pred) == doctest::Approx(0.5));
  }
  SUBCASE("each block split in half scores 0.25") {
    const std::vector<std::vector<int>> truth4 = {{0, 1, 2, 3}, {4, 5, 6, 7}};
    const std::vector<std::vector<int>> pred = {{0, 1}, {2, 3}, {4, 5}, {6, 7}};
    CHECK(eval::rg_sim(truth4, pred) == doctest::Approx(0.25));
  }
  SUBCASE("no overlapping predicted group scores 0") {
    CHECK(eval::rg_sim(truth, {{10, 11}, {12}}) == doctest::Approx(0.0));
  }
  SUBCASE("invariant to group ordering") {
    Rng rng(41);
    std::vector<std::vector<int>> pred = {{0, 1, 2}, {3, 4}, {5, 6, 7, 8, 9}, {10, 11}};
    const double base = eval::rg_sim(truth, pred);
    for (int rep = 0; rep < 10; ++rep) {
      std::vector<int> order = rng.permutation(static_cast<int>(pred.size()));
      std::vector<std::vector<int>> shuffled;
      for (int k : order) shuffled.push_back(pred[k]);
      CHECK(eval::rg_sim(truth, shuffled) == doctest::Approx(base));
      std::vector<std::vector<int>> truth_r = {truth[1], truth[0]};
      CHECK(eval::rg_sim(truth_r, shuffled) == doctest::Approx(base));
    }
  }
}

TEST_CASE("tpr_fdr") {
  const std::vector<int> informative = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  SUBCASE("exact selection") {
    const auto [tpr, fdr] = eval::tpr_fdr(informative, informative, 20);
    CHECK(tpr == doctest::Approx(1.0));
    CHECK(fdr == doctest::Approx(0.0));
  }
  SUBCASE("selecting everything") {
    std::vector<int> all(20);
    std::iota(all.begin(), all.end(), 0);
    const auto [tpr, fdr] = eval::tpr_fdr(all, informative, 20);
    CHECK(tpr == doctest::Approx(1.0));
    CHECK(fdr == doctest::Approx(0.5));
  }
  SUBCASE("empty selection") {
    const auto [tpr, fdr] = eval::tpr_fdr({}, informative, 20);
    CHECK(tpr == doctest::Approx(0.0));
    CHECK(fdr == doctest::Approx(0.0));
  }
}
