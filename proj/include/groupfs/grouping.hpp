#pragma once

#include <vector>

#include "groupfs/mat.hpp"
#include "groupfs/rng.hpp"

namespace groupfs::grouping {

/// Learnable feature-to-group assignment state: d x C logits plus the
/// current Gumbel-Softmax temperature.
struct GroupingState {
  Mat logits;          // d x C
  double temperature;  // > 0
};

/// Linear temperature decay clipped below at min_t.
struct TemperatureSchedule {
  TemperatureSchedule(double start, double minimum, int epochs)
      : start_t(start), min_t(minimum), total_epochs(epochs) {
    require(minimum > 0.0, "TemperatureSchedule: min_t must be positive");
    require(start >= minimum, "TemperatureSchedule: start_t must be >= min_t");
    require(epochs >= 1, "TemperatureSchedule: total_epochs must be >= 1");
  }
  double start_t;
  double min_t;
  int total_epochs;
};

double temperature_at(const TemperatureSchedule& sched, int epoch);

/// Relaxed categorical sample: row-wise softmax of (logits + gumbel)/T.
/// Each row lands on the simplex; fully differentiable in the logits.
Mat gumbel_softmax(const Mat& logits, const Mat& gumbel, double temperature);

/// Draws fresh Gumbel noise and returns the relaxed assignment matrix M.
Mat sample_assignment(const GroupingState& state, Rng& rng);

/// Noise-free argmax readout; ties break to the lowest index.
std::vector<int> hard_assignment(const GroupingState& state);

/// Spectral warm start: logit Delta = log(p_main / p_rest) at the assigned
/// cluster, 0 elsewhere, with p_rest = (1 - p_main) / (C - 1).
Mat init_logits(const std::vector<int>& labels, int C, double p_main = 0.7);

}  // namespace groupfs::grouping
