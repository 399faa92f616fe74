#include "groupfs/grouping.hpp"

#include <cmath>

namespace groupfs::grouping {

double temperature_at(const TemperatureSchedule& sched, int epoch) {
  const double frac = static_cast<double>(epoch) / sched.total_epochs;
  return std::max(sched.min_t, sched.start_t - (sched.start_t - sched.min_t) * frac);
}

Mat gumbel_softmax(const Mat& logits, const Mat& gumbel, double temperature) {
  require(logits.same_shape(gumbel), "gumbel_softmax: noise shape mismatch");
  require(temperature > 0.0, "gumbel_softmax: temperature must be positive");
  const int d = logits.rows(), C = logits.cols();
  Mat M(d, C);
  for (int i = 0; i < d; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < C; ++j) {
      M(i, j) = (logits(i, j) + gumbel(i, j)) / temperature;
      mx = std::max(mx, M(i, j));
    }
    double sum = 0.0;
    for (int j = 0; j < C; ++j) {
      M(i, j) = std::exp(M(i, j) - mx);
      sum += M(i, j);
    }
    for (int j = 0; j < C; ++j) M(i, j) /= sum;
  }
  return M;
}

Mat sample_assignment(const GroupingState& state, Rng& rng) {
  const Mat g = rng.gumbel_mat(state.logits.rows(), state.logits.cols());
  return gumbel_softmax(state.logits, g, state.temperature);
}

std::vector<int> hard_assignment(const GroupingState& state) {
  const int d = state.logits.rows(), C = state.logits.cols();
  std::vector<int> labels(d, 0);
  for (int i = 0; i < d; ++i) {
    int arg = 0;
    for (int j = 1; j < C; ++j)
      if (state.logits(i, j) > state.logits(i, arg)) arg = j;
    labels[i] = arg;
  }
  return labels;
}

Mat init_logits(const std::vector<int>& labels, int C, double p_main) {
  require(C >= 2, "init_logits: C must be >= 2");
  require(p_main > 1.0 / C && p_main < 1.0, "init_logits: need 1/C < p_main < 1");
  const double p_rest = (1.0 - p_main) / (C - 1);
  const double delta = std::log(p_main / p_rest);
  Mat logits(static_cast<int>(labels.size()), C);
  for (size_t i = 0; i < labels.size(); ++i) {
    require(labels[i] >= 0 && labels[i] < C, "init_logits: label out of range");
    logits(static_cast<int>(i), labels[i]) = delta;
  }
  return logits;
}

}  // namespace groupfs::grouping
