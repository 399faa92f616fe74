#include "groupfs/eval.hpp"

#include "groupfs/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>

namespace groupfs::eval {

namespace {

double sqdist_row(const double* a, const double* b, int m) {
  double s = 0.0;
  for (int p = 0; p < m; ++p) {
    const double d = a[p] - b[p];
    s += d * d;
  }
  return s;
}

KMeansResult lloyd_once(const Mat& X, int k, Rng& rng, int max_iter) {
  const int n = X.rows(), m = X.cols();
  Mat C(k, m);

  // k-means++ seeding.
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  {
    const int first = static_cast<int>(rng.below(n));
    for (int j = 0; j < m; ++j) C(0, j) = X(first, j);
    for (int c = 1; c < k; ++c) {
      double total = 0.0;
      for (int i = 0; i < n; ++i) {
        d2[i] = std::min(d2[i], sqdist_row(X.row(i), C.row(c - 1), m));
        total += d2[i];
      }
      int pick;
      if (total <= 0.0) {
        pick = static_cast<int>(rng.below(n));  // all remaining mass on duplicates
      } else {
        const double u = rng.uniform() * total;
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
      for (int j = 0; j < m; ++j) C(c, j) = X(pick, j);
    }
  }

  std::vector<int> labels(n, -1), prev(n, -2);
  std::vector<double> nearest(n, 0.0);
  for (int it = 0; it < max_iter; ++it) {
    for (int i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int arg = 0;
      for (int c = 0; c < k; ++c) {
        const double d = sqdist_row(X.row(i), C.row(c), m);
        if (d < best) {
          best = d;
          arg = c;
        }
      }
      labels[i] = arg;
      nearest[i] = best;
    }
    // Re-seed emptied clusters from the farthest point.
    std::vector<int> counts(k, 0);
    for (int i = 0; i < n; ++i) counts[labels[i]]++;
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      int far = 0;
      double fd = -1.0;
      for (int i = 0; i < n; ++i)
        if (counts[labels[i]] > 1 && nearest[i] > fd) {
          fd = nearest[i];
          far = i;
        }
      counts[labels[far]]--;
      labels[far] = c;
      counts[c] = 1;
      nearest[far] = 0.0;
      for (int j = 0; j < m; ++j) C(c, j) = X(far, j);
    }
    if (labels == prev) break;
    prev = labels;
    C = Mat(k, m);
    for (int i = 0; i < n; ++i) {
      double* cc = C.row(labels[i]);
      const double* xi = X.row(i);
      for (int j = 0; j < m; ++j) cc[j] += xi[j];
    }
    for (int c = 0; c < k; ++c) {
      double* cc = C.row(c);
      for (int j = 0; j < m; ++j) cc[j] /= counts[c];
    }
  }

  double inertia = 0.0;
  for (int i = 0; i < n; ++i) inertia += sqdist_row(X.row(i), C.row(labels[i]), m);
  return {std::move(labels), inertia, std::move(C)};
}

// Hungarian method (potentials / shortest augmenting path) on a square cost
// matrix; returns the assignment column for each row.
std::vector<int> hungarian_min(const Mat& cost) {
  const int n = cost.rows();
  const double INF = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, INF);
    std::vector<char> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      double delta = INF;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
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
  std::vector<int> match(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) match[p[j] - 1] = j - 1;
  return match;
}

int relabel(const std::vector<int>& a, std::vector<int>& out) {
  std::vector<int> ids;
  out.resize(a.size());
  for (size_t i = 0; i < a.size(); ++i) {
    auto it = std::find(ids.begin(), ids.end(), a[i]);
    if (it == ids.end()) {
      ids.push_back(a[i]);
      out[i] = static_cast<int>(ids.size()) - 1;
    } else {
      out[i] = static_cast<int>(it - ids.begin());
    }
  }
  return static_cast<int>(ids.size());
}

double binom2(int64_t x) { return 0.5 * static_cast<double>(x) * (x - 1); }

std::set<int> as_set(const std::vector<int>& v) { return std::set<int>(v.begin(), v.end()); }

double jaccard(const std::set<int>& a, const std::set<int>& b) {
  int inter = 0;
  for (int x : a) inter += b.count(x);
  const int uni = static_cast<int>(a.size() + b.size()) - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / uni;
}

}  // namespace

KMeansResult kmeans(const Mat& X, int k, uint64_t seed, int n_init, int max_iter) {
  require(k >= 1, "kmeans: k must be >= 1");
  require(k <= X.rows(), "kmeans: k must be <= number of samples");
  require(n_init >= 1, "kmeans: n_init must be >= 1");
  Rng rng(seed);
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < n_init; ++r) {
    KMeansResult cur = lloyd_once(X, k, rng, max_iter);
    if (cur.inertia < best.inertia) best = std::move(cur);
  }
  return best;
}

double clustering_accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
  require(pred.size() == truth.size(), "clustering_accuracy: length mismatch");
  require(!pred.empty(), "clustering_accuracy: empty input");
  std::vector<int> p, t;
  const int kp = relabel(pred, p), kt = relabel(truth, t);
  const int k = std::max(kp, kt);
  Mat confusion(k, k);  // padded square
  for (size_t i = 0; i < p.size(); ++i) confusion(p[i], t[i]) += 1.0;
  // Maximize matched mass == minimize negated counts.
  Mat cost = confusion;
  for (size_t i = 0; i < cost.size(); ++i) cost[i] = -cost[i];
  const std::vector<int> match = hungarian_min(cost);
  double hits = 0.0;
  for (int i = 0; i < k; ++i) hits += confusion(i, match[i]);
  return hits / static_cast<double>(p.size());
}

double ari(const std::vector<int>& pred, const std::vector<int>& truth) {
  require(pred.size() == truth.size(), "ari: length mismatch");
  require(!pred.empty(), "ari: empty input");
  std::vector<int> p, t;
  const int kp = relabel(pred, p), kt = relabel(truth, t);
  Mat contingency(kp, kt);
  for (size_t i = 0; i < p.size(); ++i) contingency(p[i], t[i]) += 1.0;
  const int64_t n = static_cast<int64_t>(p.size());
  double sum_ij = 0.0;
  for (size_t k = 0; k < contingency.size(); ++k)
    sum_ij += binom2(static_cast<int64_t>(contingency[k]));
  double sum_a = 0.0, sum_b = 0.0;
  for (double s : kern::row_sums(contingency)) sum_a += binom2(static_cast<int64_t>(s));
  for (double s : kern::col_sums(contingency)) sum_b += binom2(static_cast<int64_t>(s));
  const double total = binom2(n);
  // 2*(T*Sij - Sa*Sb) / (T*(Sa+Sb) - 2*Sa*Sb); exact for the sizes we handle.
  const double num = 2.0 * (total * sum_ij - sum_a * sum_b);
  const double den = total * (sum_a + sum_b) - 2.0 * sum_a * sum_b;
  if (den == 0.0) return p == t ? 1.0 : 0.0;  // both partitions trivial
  return num / den;
}

double rg_sim(const std::vector<std::vector<int>>& truth_groups,
              const std::vector<std::vector<int>>& predicted_groups) {
  require(!truth_groups.empty(), "rg_sim: truth groups must be nonempty");
  std::vector<std::set<int>> truth;
  for (const auto& g : truth_groups) {
    require(!g.empty(), "rg_sim: truth groups must be nonempty");
    truth.push_back(as_set(g));
  }
  std::vector<std::set<int>> overlapping;
  for (const auto& g : predicted_groups) {
    const std::set<int> s = as_set(g);
    if (s.empty()) continue;
    for (const auto& tg : truth) {
      if (std::any_of(s.begin(), s.end(), [&](int x) { return tg.count(x) > 0; })) {
        overlapping.push_back(s);
        break;
      }
    }
  }
  if (overlapping.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& tg : truth) {
    double best = 0.0;
    for (const auto& pg : overlapping) best = std::max(best, jaccard(tg, pg));
    sum += best;
  }
  return sum / static_cast<double>(std::max(truth.size(), overlapping.size()));
}

std::pair<double, double> tpr_fdr(const std::vector<int>& selected,
                                  const std::vector<int>& informative_set, int d) {
  const std::set<int> sel = as_set(selected);
  const std::set<int> inf = as_set(informative_set);
  for (int s : sel) require(s >= 0 && s < d, "tpr_fdr: selected index out of range");
  int hits = 0;
  for (int s : sel) hits += inf.count(s);
  const double tpr = inf.empty() ? 0.0 : static_cast<double>(hits) / inf.size();
  const double fdr =
      sel.empty() ? 0.0 : static_cast<double>(sel.size() - hits) / sel.size();
  return {tpr, fdr};
}

MetricReport evaluate_selection(const Mat& X_zscored, const std::vector<int>& selected,
                                const std::vector<int>& labels,
                                const std::vector<std::vector<int>>& true_groups,
                                const std::vector<std::vector<int>>& predicted_groups,
                                int k, int n_seeds) {
  MetricReport rep;
  rep.n_selected = static_cast<int>(selected.size());
  for (int s : selected)
    require(s >= 0 && s < X_zscored.cols(), "evaluate_selection: selected index out of range");

  if (!labels.empty() && !selected.empty()) {
    require(static_cast<int>(labels.size()) == X_zscored.rows(),
            "evaluate_selection: labels length mismatch");
    Mat sub(X_zscored.rows(), static_cast<int>(selected.size()));
    for (int i = 0; i < sub.rows(); ++i)
      for (size_t j = 0; j < selected.size(); ++j)
        sub(i, static_cast<int>(j)) = X_zscored(i, selected[j]);
    std::vector<double> accs, aris;
    for (int s = 0; s < n_seeds; ++s) {
      const KMeansResult km = kmeans(sub, k, static_cast<uint64_t>(s));
      accs.push_back(100.0 * clustering_accuracy(km.labels, labels));
      aris.push_back(100.0 * ari(km.labels, labels));
    }
    auto mean_std = [](const std::vector<double>& v) {
      double m = 0.0;
      for (double x : v) m += x;
      m /= v.size();
      double var = 0.0;
      for (double x : v) var += (x - m) * (x - m);
      return std::pair<double, double>{m, std::sqrt(var / v.size())};
    };
    std::tie(rep.accuracy_mean, rep.accuracy_std) = mean_std(accs);
    std::tie(rep.ari_mean, rep.ari_std) = mean_std(aris);
  }

  if (!true_groups.empty()) {
    rep.rg = rg_sim(true_groups, predicted_groups);
    std::vector<int> informative;
    for (const auto& g : true_groups) informative.insert(informative.end(), g.begin(), g.end());
    const auto [tp, fd] = tpr_fdr(selected, informative, X_zscored.cols());
    rep.tpr = tp;
    rep.fdr = fd;
  }
  return rep;
}

}  // namespace groupfs::eval
