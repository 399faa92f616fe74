#include "groupfs/graph.hpp"

#include <algorithm>
#include <cmath>

#include "groupfs/eval.hpp"
#include "groupfs/kernels.hpp"
#include "groupfs/linalg.hpp"

namespace groupfs::graph {

std::vector<double> self_tuning_bandwidths(const Mat& sqdist, int K) {
  const int n = sqdist.rows();
  require(K >= 1, "self_tuning_bandwidths: K must be >= 1");
  require(K < n, "self_tuning_bandwidths: need at least K+1 points");
  std::vector<double> gamma(n);
  std::vector<double> row(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) row[j] = sqdist(i, j);
    // Row includes the zero self-distance; the K-th neighbor sits at index K
    // once the row is sorted ascending.
    std::nth_element(row.begin(), row.begin() + K, row.end());
    gamma[i] = std::sqrt(std::max(0.0, row[K]));
  }
  std::vector<double> sorted = gamma;
  std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
  const double median = sorted[n / 2];
  const double floor_val = std::max(1e-12 * median, 1e-12);
  for (double& g : gamma) g = std::max(g, floor_val);
  return gamma;
}

AffinityGraph self_tuning_affinity(const Mat& X, int K) {
  const int n = X.rows();
  require(n >= K + 1, "self_tuning_affinity: need at least K+1 rows");
  require(X.all_finite(), "self_tuning_affinity: non-finite input");
  const Mat S = kern::pairwise_sqdist(X);
  const std::vector<double> gamma = self_tuning_bandwidths(S, K);
  AffinityGraph g;
  g.W = Mat(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) g.W(i, j) = std::exp(-S(i, j) / (gamma[i] * gamma[j]));
  g.degrees = kern::row_sums(g.W);
  return g;
}

GraphOperators graph_operators(const AffinityGraph& g) {
  const int n = g.W.rows();
  GraphOperators ops;
  ops.L_sym = Mat(n, n);
  ops.P = Mat(n, n);
  std::vector<double> dinv_sqrt(n);
  for (int i = 0; i < n; ++i) {
    if (!(g.degrees[i] > 0.0))
      throw NumericalError("graph_operators: zero degree at node " + std::to_string(i));
    dinv_sqrt[i] = 1.0 / std::sqrt(g.degrees[i]);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      ops.L_sym(i, j) = (i == j ? 1.0 : 0.0) - dinv_sqrt[i] * g.W(i, j) * dinv_sqrt[j];
      ops.P(i, j) = g.W(i, j) / g.degrees[i];
    }
  }
  return ops;
}

Mat diffuse(const Mat& P, int t) {
  require(P.rows() == P.cols(), "diffuse: P must be square");
  require(t >= 1, "diffuse: t must be >= 1");
  Mat out = P;
  for (int s = 1; s < t; ++s) out = kern::matmul(out, P);
  return out;
}

std::vector<double> laplacian_score(const Mat& X, const GraphOperators& ops) {
  require(X.rows() == ops.L_sym.rows(), "laplacian_score: dimension mismatch");
  const Mat LX = kern::matmul(ops.L_sym, X);
  std::vector<double> score(X.cols(), 0.0);
  for (int i = 0; i < X.rows(); ++i)
    for (int k = 0; k < X.cols(); ++k) score[k] += X(i, k) * LX(i, k);
  return score;
}

Mat spectral_embedding(const Mat& L_sym, int C) {
  require(C >= 1, "spectral_embedding: C must be >= 1");
  require(C <= L_sym.rows(), "spectral_embedding: C must be <= n");
  Mat vectors;
  std::vector<double> values;
  linalg::eigh(L_sym, vectors, values);  // ascending
  const int n = L_sym.rows();
  Mat U(n, C);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < C; ++c) U(i, c) = vectors(i, c);
  for (int i = 0; i < n; ++i) {
    double norm = 0.0;
    for (int c = 0; c < C; ++c) norm += U(i, c) * U(i, c);
    norm = std::sqrt(norm);
    if (norm > 0.0)
      for (int c = 0; c < C; ++c) U(i, c) /= norm;
  }
  return U;
}

std::vector<int> spectral_cluster(const Mat& L_sym, int C, Rng& rng) {
  require(C >= 2, "spectral_cluster: C must be >= 2");
  const Mat U = spectral_embedding(L_sym, C);
  return eval::kmeans(U, C, rng.next_u64(), /*n_init=*/10).labels;
}

}  // namespace groupfs::graph
