#pragma once

#include <optional>
#include <vector>

#include "groupfs/mat.hpp"
#include "groupfs/rng.hpp"

namespace groupfs::eval {

struct KMeansResult {
  std::vector<int> labels;
  double inertia = 0.0;
  Mat centroids;
};

/// Lloyd's algorithm with distance-weighted (k-means++) seeding. Converges
/// when assignments stabilize or after max_iter sweeps. An emptied cluster is
/// re-seeded from the point farthest from its current centroid. n_init > 1
/// keeps the restart with the best inertia.
KMeansResult kmeans(const Mat& X, int k, uint64_t seed, int n_init = 1, int max_iter = 300);

/// Maximum accuracy over label matchings, via the Hungarian method on the
/// confusion matrix (rectangular label sets handled by padding).
double clustering_accuracy(const std::vector<int>& pred, const std::vector<int>& truth);

/// Adjusted Rand Index in [-1, 1].
double ari(const std::vector<int>& pred, const std::vector<int>& truth);

/// Relevant-Group Similarity: predicted groups are filtered to those that
/// overlap any ground-truth group, then each truth group is matched to its
/// best Jaccard partner and the sum is normalized by
/// max(#truth, #overlapping predicted).
double rg_sim(const std::vector<std::vector<int>>& truth_groups,
              const std::vector<std::vector<int>>& predicted_groups);

/// (TPR, FDR) of `selected` against the informative index set; FDR is 0 for
/// an empty selection.
std::pair<double, double> tpr_fdr(const std::vector<int>& selected,
                                  const std::vector<int>& informative_set, int d);

struct MetricReport {
  // Percentages over k-means seeds, present only when labels were available.
  std::optional<double> accuracy_mean, accuracy_std;
  std::optional<double> ari_mean, ari_std;
  // Present only when ground-truth groups were available.
  std::optional<double> rg;
  std::optional<double> tpr, fdr;
  int n_selected = 0;
};

/// The Scenario-1 evaluation protocol: k-means on the selected columns with
/// seeds 0..n_seeds-1, Hungarian accuracy and ARI against `labels`, plus the
/// group metrics when ground truth is known.
MetricReport evaluate_selection(const Mat& X_zscored, const std::vector<int>& selected,
                                const std::vector<int>& labels,
                                const std::vector<std::vector<int>>& true_groups,
                                const std::vector<std::vector<int>>& predicted_groups,
                                int k, int n_seeds = 10);

}  // namespace groupfs::eval
