#pragma once

#include <vector>

#include "groupfs/mat.hpp"
#include "groupfs/rng.hpp"

namespace groupfs::graph {

/// Self-tuning affinity graph: W_ij = exp(-||x_i - x_j||^2 / (gamma_i gamma_j)),
/// gamma_i the distance from x_i to its K-th nearest neighbor. Diagonal is
/// zeroed before degrees are computed.
struct AffinityGraph {
  Mat W;                        // n x n, symmetric, entries in [0,1], zero diagonal
  std::vector<double> degrees;  // strictly positive (gamma floor guarantees it)
};

struct GraphOperators {
  Mat L_sym;  // I - D^{-1/2} W D^{-1/2}; eigenvalues in [0,2]
  Mat P;      // D^{-1} W; rows sum to 1
};

/// Per-point bandwidths from a squared-distance matrix: K-th nearest-neighbor
/// distance, floored at max(1e-12 * median(gamma), 1e-12) so duplicate points
/// cannot produce 0/0 in the kernel.
std::vector<double> self_tuning_bandwidths(const Mat& sqdist, int K);

AffinityGraph self_tuning_affinity(const Mat& X, int K);

GraphOperators graph_operators(const AffinityGraph& g);

/// P^t by repeated multiplication; t >= 1.
Mat diffuse(const Mat& P, int t);

/// Per-feature score x^T L_sym x; lower = smoother on the sample manifold.
std::vector<double> laplacian_score(const Mat& X, const GraphOperators& ops);

/// Columns = eigenvectors of the C smallest eigenvalues of L_sym, rows
/// normalized to unit length (zero rows left zero).
Mat spectral_embedding(const Mat& L_sym, int C);

/// k-means on the row-normalized embedding; 10 restarts, best inertia.
std::vector<int> spectral_cluster(const Mat& L_sym, int C, Rng& rng);

}  // namespace groupfs::graph
