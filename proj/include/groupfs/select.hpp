#pragma once

#include <string>
#include <vector>

#include "groupfs/mat.hpp"
#include "groupfs/optim.hpp"
#include "groupfs/rng.hpp"

namespace groupfs::select {

enum class BudgetKind {
  GroupCount,   // take the first k nonempty groups
  MinFeatures,  // extend the prefix until >= m features are covered
  MaxFeatures,  // largest prefix covering <= cap features
};

struct BudgetRule {
  BudgetKind kind = BudgetKind::MinFeatures;
  int value = 10;
};

struct SelectionResult {
  std::vector<int> group_order;             // all C group ids, by descending gate mean
  std::vector<std::vector<int>> groups;     // features per group id, sorted
  std::vector<int> selected;                // sorted union of the chosen prefix
  std::vector<double> gate_means;           // raw mu per group
  int budget = 0;                           // the rule's parameter
  std::string budget_rule;                  // "groups" | "min_features" | "max_features"
  bool budget_unmet = false;                // rule target unreachable; all groups returned
};

/// Groups from the noise-free argmax readout, ranked by gate mean (ties break
/// to the lower group id); the selection is a prefix of the nonempty groups.
SelectionResult rank_and_select(const optim::TrainedModel& model, const BudgetRule& rule);

/// Procrustes distortion E(C): row-normalized spectral embedding of L_feat,
/// k-means labels, indicator matrix Y, closed-form rotation R* = U V^T from
/// the SVD of U~^T Y, then ||U~ R* - Y||_F^2.
double distortion_score(const Mat& L_feat, int C, Rng& rng);

struct ChooseCResult {
  int chosen = 0;                 // global minimum of the curve
  std::vector<int> candidates;    // C values, 2..C_max
  std::vector<double> scores;     // E(C) per candidate
  std::vector<int> local_minima;  // C values that beat both neighbors
};

ChooseCResult choose_C(const Mat& L_feat, int C_max, Rng& rng);

}  // namespace groupfs::select
