#include "groupfs/gates.hpp"

#include <cmath>

namespace groupfs::gates {

double gauss_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

Mat clipped_gates(const Mat& mu, const Mat& eps) {
  require(mu.same_shape(eps), "clipped_gates: noise shape mismatch");
  Mat z = mu;
  for (size_t k = 0; k < z.size(); ++k)
    z[k] = std::clamp(mu[k] + eps[k], 0.0, 1.0);
  return z;
}

Mat sample_gates(const GateState& state, Rng& rng) {
  require(state.sigma > 0.0, "sample_gates: sigma must be positive");
  const Mat eps = rng.normal_mat(state.mu.rows(), state.mu.cols(), state.sigma);
  return clipped_gates(state.mu, eps);
}

Mat open_probability(const GateState& state) {
  require(state.sigma > 0.0, "open_probability: sigma must be positive");
  Mat p = state.mu;
  for (size_t k = 0; k < p.size(); ++k) p[k] = gauss_cdf(state.mu[k] / state.sigma);
  return p;
}

Mat feature_weights(const Mat& M, const Mat& z) {
  require(z.rows() == 1 && z.cols() == M.cols(), "feature_weights: dimension mismatch");
  const int d = M.rows(), C = M.cols();
  Mat zhat(1, d);
  for (int i = 0; i < d; ++i) {
    double s = 0.0;
    for (int j = 0; j < C; ++j) s += M(i, j) * z(0, j);
    zhat(0, i) = s;
  }
  return zhat;
}

Mat apply_gates(const Mat& X_B, const Mat& z_hat) {
  require(z_hat.rows() == 1 && z_hat.cols() == X_B.cols(), "apply_gates: dimension mismatch");
  Mat out = X_B;
  for (int i = 0; i < out.rows(); ++i) {
    double* ri = out.row(i);
    for (int j = 0; j < out.cols(); ++j) ri[j] *= z_hat(0, j);
  }
  return out;
}

}  // namespace groupfs::gates
