#include "groupfs/select.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "groupfs/eval.hpp"
#include "groupfs/graph.hpp"
#include "groupfs/grouping.hpp"
#include "groupfs/kernels.hpp"
#include "groupfs/linalg.hpp"

namespace groupfs::select {

SelectionResult rank_and_select(const optim::TrainedModel& model, const BudgetRule& rule) {
  const Mat& logits = model.params.logits;
  const Mat& mu = model.params.mu;
  const int d = logits.rows(), C = logits.cols();
  require(mu.cols() == C, "rank_and_select: mu/logits dimension mismatch");
  require(rule.value >= 0, "rank_and_select: budget must be nonnegative");

  SelectionResult res;
  res.budget = rule.value;
  res.budget_rule = rule.kind == BudgetKind::GroupCount    ? "groups"
                    : rule.kind == BudgetKind::MinFeatures ? "min_features"
                                                           : "max_features";
  res.gate_means.resize(C);
  for (int j = 0; j < C; ++j) res.gate_means[j] = mu(0, j);

  grouping::GroupingState state{logits, 1.0};
  const std::vector<int> labels = grouping::hard_assignment(state);
  res.groups.assign(C, {});
  for (int i = 0; i < d; ++i) res.groups[labels[i]].push_back(i);

  res.group_order.resize(C);
  std::iota(res.group_order.begin(), res.group_order.end(), 0);
  std::stable_sort(res.group_order.begin(), res.group_order.end(),
                   [&](int a, int b) { return res.gate_means[a] > res.gate_means[b]; });

  // Walk the ranked nonempty groups and grow the prefix per the rule.
  std::vector<int> taken;
  int groups_taken = 0;
  bool reached = rule.kind == BudgetKind::MaxFeatures;  // a cap is always satisfiable
  for (int gid : res.group_order) {
    const auto& members = res.groups[gid];
    if (members.empty()) continue;
    if (rule.kind == BudgetKind::GroupCount) {
      if (groups_taken == rule.value) {
        reached = true;
        break;
      }
    } else if (rule.kind == BudgetKind::MinFeatures) {
      if (static_cast<int>(taken.size()) >= rule.value) {
        reached = true;
        break;
      }
    } else {  // MaxFeatures
      if (static_cast<int>(taken.size() + members.size()) > rule.value) break;
    }
    taken.insert(taken.end(), members.begin(), members.end());
    ++groups_taken;
  }
  if (rule.kind == BudgetKind::GroupCount && groups_taken == rule.value) reached = true;
  if (rule.kind == BudgetKind::MinFeatures && static_cast<int>(taken.size()) >= rule.value)
    reached = true;
  res.budget_unmet = !reached;

  std::sort(taken.begin(), taken.end());
  res.selected = std::move(taken);
  return res;
}

double distortion_score(const Mat& L_feat, int C, Rng& rng) {
  const int d = L_feat.rows();
  require(C >= 2, "distortion_score: C must be >= 2");
  require(C <= d, "distortion_score: C must be <= d");
  const Mat U = graph::spectral_embedding(L_feat, C);

  // k-means with restarts; re-seed on a degenerate labeling (a cluster that
  // never materializes) up to 10 times.
  std::vector<int> labels;
  for (int attempt = 0;; ++attempt) {
    const eval::KMeansResult km = eval::kmeans(U, C, rng.next_u64(), /*n_init=*/10);
    std::set<int> distinct(km.labels.begin(), km.labels.end());
    if (static_cast<int>(distinct.size()) == C) {
      labels = km.labels;
      break;
    }
    if (attempt >= 10)
      throw NumericalError("distortion_score: k-means kept an empty cluster after 10 reseeds");
  }

  Mat Y(d, C);
  for (int i = 0; i < d; ++i) Y(i, labels[i]) = 1.0;

  const Mat A = kern::matmul_tn(U, Y);  // C x C
  Mat Usvd, Vt;
  std::vector<double> S;
  linalg::svd(A, Usvd, S, Vt);
  const Mat R = kern::matmul(Usvd, Vt);

  const Mat diff = kern::sub(kern::matmul(U, R), Y);
  return kern::frobenius_sq(diff);
}

ChooseCResult choose_C(const Mat& L_feat, int C_max, Rng& rng) {
  require(C_max >= 3, "choose_C: C_max must be >= 3");
  require(C_max <= L_feat.rows(), "choose_C: C_max must be <= d");
  ChooseCResult res;
  for (int C = 2; C <= C_max; ++C) {
    res.candidates.push_back(C);
    res.scores.push_back(distortion_score(L_feat, C, rng));
  }
  const auto it = std::min_element(res.scores.begin(), res.scores.end());
  res.chosen = res.candidates[it - res.scores.begin()];
  for (size_t k = 0; k < res.scores.size(); ++k) {
    const bool left_ok = k == 0 || res.scores[k] < res.scores[k - 1];
    const bool right_ok = k + 1 == res.scores.size() || res.scores[k] < res.scores[k + 1];
    if (left_ok && right_ok) res.local_minima.push_back(res.candidates[k]);
  }
  return res;
}

}  // namespace groupfs::select
