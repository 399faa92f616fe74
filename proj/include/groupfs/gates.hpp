#pragma once

#include "groupfs/mat.hpp"
#include "groupfs/rng.hpp"

namespace groupfs::gates {

/// Group-level stochastic gates: clipped Gaussians z_j = clamp(mu_j + eps, 0, 1)
/// with a fixed noise scale shared by all gates.
struct GateState {
  Mat mu;        // 1 x C gate means
  double sigma;  // > 0, constant during training
};

Mat clipped_gates(const Mat& mu, const Mat& eps);

/// One draw of all C gates.
Mat sample_gates(const GateState& state, Rng& rng);

/// P(z_j > 0) = Phi(mu_j / sigma).
Mat open_probability(const GateState& state);

double gauss_cdf(double x);

/// Per-feature weights z_hat = M z (1 x d); convex combination of the gates.
Mat feature_weights(const Mat& M, const Mat& z);

/// X_tilde = X_B with column i scaled by z_hat_i.
Mat apply_gates(const Mat& X_B, const Mat& z_hat);

}  // namespace groupfs::gates
