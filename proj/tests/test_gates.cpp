#include <doctest.h>

#include <cmath>

#include "groupfs/gates.hpp"
#include "groupfs/rng.hpp"

using groupfs::Mat;
using groupfs::Rng;
namespace gates = groupfs::gates;

namespace {

// Gaussian CDF by series/continued evaluation of erf, independent of erfc:
// Phi(x) = 1/2 + phi(x) * sum_{k>=0} x^(2k+1) / (1*3*5*...*(2k+1))
double cdf_series_oracle(double x) {
  if (x < -8.0) return 0.0;
  if (x > 8.0) return 1.0;
  double term = x, sum = x;
  for (int k = 1; k < 200; ++k) {
    term *= x * x / (2.0 * k + 1.0);
    sum += term;
    if (std::abs(term) < 1e-18) break;
  }
  return 0.5 + sum * std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

}  // namespace

TEST_CASE("sample_gates clipping") {
  Rng rng(3);
  SUBCASE("deep in the upper clip") {
    const gates::GateState state{Mat(1, 3, 5.0), 0.5};
    const Mat z = gates::sample_gates(state, rng);
    for (int j = 0; j < 3; ++j) CHECK(z(0, j) == 1.0);
  }
  SUBCASE("deep in the lower clip") {
    const gates::GateState state{Mat(1, 3, -5.0), 0.5};
    const Mat z = gates::sample_gates(state, rng);
    for (int j = 0; j < 3; ++j) CHECK(z(0, j) == 0.0);
  }
  SUBCASE("identity inside (0,1) with suppressed noise") {
    const Mat z = gates::clipped_gates(Mat(1, 4, 0.5), Mat(1, 4));
    for (int j = 0; j < 4; ++j) CHECK(z(0, j) == doctest::Approx(0.5));
  }
  SUBCASE("gates always land in [0,1]") {
    gates::GateState state{Mat(1, 6), 0.5};
    for (int j = 0; j < 6; ++j) state.mu(0, j) = -1.0 + 0.4 * j;
    for (int rep = 0; rep < 300; ++rep) {
      const Mat z = gates::sample_gates(state, rng);
      for (int j = 0; j < 6; ++j) {
        CHECK(z(0, j) >= 0.0);
        CHECK(z(0, j) <= 1.0);
      }
    }
  }
}

TEST_CASE("open_probability") {
  SUBCASE("mu=0 opens half the time") {
    const gates::GateState state{Mat(1, 1, 0.0), 0.5};
    CHECK(gates::open_probability(state)(0, 0) == doctest::Approx(0.5));
  }
  SUBCASE("mu=0.5, sigma=0.5 gives Phi(1), checked against the series oracle") {
    const gates::GateState state{Mat(1, 1, 0.5), 0.5};
    const double oracle = cdf_series_oracle(1.0);
    CHECK(oracle == doctest::Approx(0.8413447460685429).epsilon(1e-12));
    CHECK(gates::open_probability(state)(0, 0) == doctest::Approx(oracle).epsilon(1e-12));
  }
  SUBCASE("large mu saturates to 1") {
    const gates::GateState state{Mat(1, 1, 100.0), 0.5};
    CHECK(gates::open_probability(state)(0, 0) == doctest::Approx(1.0));
  }
  SUBCASE("empirical open fraction matches Phi within 3 Monte-Carlo sigmas") {
    Rng rng(11);
    const double sigma = 0.5;
    for (const double mu : {-1.0, 0.0, 0.5, 1.0}) {
      const gates::GateState state{Mat(1, 1, mu), sigma};
      const double p = gates::open_probability(state)(0, 0);
      const int draws = 100000;
      int open = 0;
      for (int k = 0; k < draws; ++k)
        if (gates::sample_gates(state, rng)(0, 0) > 0.0) ++open;
      const double phat = static_cast<double>(open) / draws;
      const double mc_sigma = std::sqrt(p * (1.0 - p) / draws);
      CHECK(std::abs(phat - p) <= 3.0 * mc_sigma);
    }
  }
}

TEST_CASE("feature_weights") {
  SUBCASE("one-hot rows select their gate") {
    Mat M(3, 2);
    M(0, 0) = 1.0;
    M(1, 1) = 1.0;
    M(2, 0) = 1.0;
    Mat z(1, 2);
    z(0, 0) = 0.2;
    z(0, 1) = 0.9;
    const Mat zhat = gates::feature_weights(M, z);
    CHECK(zhat(0, 0) == doctest::Approx(0.2));
    CHECK(zhat(0, 1) == doctest::Approx(0.9));
    CHECK(zhat(0, 2) == doctest::Approx(0.2));
  }
  SUBCASE("all-open gates pass rows through") {
    Rng rng(13);
    Mat M(4, 3);
    for (int i = 0; i < 4; ++i) {
      double sum = 0.0;
      for (int j = 0; j < 3; ++j) {
        M(i, j) = rng.uniform() + 0.01;
        sum += M(i, j);
      }
      for (int j = 0; j < 3; ++j) M(i, j) /= sum;
    }
    const Mat zhat = gates::feature_weights(M, Mat(1, 3, 1.0));
    for (int i = 0; i < 4; ++i) CHECK(zhat(0, i) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("uniform rows average the gates") {
    const Mat M(5, 4, 0.25);
    Mat z(1, 4);
    z(0, 0) = 0.1; z(0, 1) = 0.4; z(0, 2) = 0.7; z(0, 3) = 1.0;
    const Mat zhat = gates::feature_weights(M, z);
    for (int i = 0; i < 5; ++i) CHECK(zhat(0, i) == doctest::Approx(0.55).epsilon(1e-12));
  }
  SUBCASE("convexity bound holds on random draws") {
    Rng rng(17);
    for (int rep = 0; rep < 50; ++rep) {
      Mat M(6, 4);
      for (int i = 0; i < 6; ++i) {
        double sum = 0.0;
        for (int j = 0; j < 4; ++j) {
          M(i, j) = rng.uniform() + 1e-3;
          sum += M(i, j);
        }
        for (int j = 0; j < 4; ++j) M(i, j) /= sum;
      }
      gates::GateState state{Mat(1, 4), 0.5};
      for (int j = 0; j < 4; ++j) state.mu(0, j) = rng.normal();
      const Mat z = gates::sample_gates(state, rng);
      double zmin = 1.0, zmax = 0.0;
      for (int j = 0; j < 4; ++j) {
        zmin = std::min(zmin, z(0, j));
        zmax = std::max(zmax, z(0, j));
      }
      const Mat zhat = gates::feature_weights(M, z);
      for (int i = 0; i < 6; ++i) {
        CHECK(zhat(0, i) >= zmin - 1e-12);
        CHECK(zhat(0, i) <= zmax + 1e-12);
      }
    }
  }
  SUBCASE("dimension mismatch rejected") {
    CHECK_THROWS_AS(gates::feature_weights(Mat(3, 2), Mat(1, 3)), std::invalid_argument);
  }
}

TEST_CASE("apply_gates") {
  Rng rng(19);
  const Mat X = rng.normal_mat(4, 5);
  SUBCASE("identity gates") {
    const Mat out = gates::apply_gates(X, Mat(1, 5, 1.0));
    for (size_t k = 0; k < X.size(); ++k) CHECK(out[k] == X[k]);
  }
  SUBCASE("closed gates") {
    const Mat out = gates::apply_gates(X, Mat(1, 5, 0.0));
    for (size_t k = 0; k < X.size(); ++k) CHECK(out[k] == 0.0);
  }
  SUBCASE("single open column survives") {
    Mat zhat(1, 5);
    zhat(0, 2) = 1.0;
    const Mat out = gates::apply_gates(X, zhat);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 5; ++j) CHECK(out(i, j) == (j == 2 ? X(i, j) : 0.0));
  }
}

TEST_CASE("d(zhat)/d(mu) matches finite differences away from clips") {
  Rng rng(23);
  const int d = 5, C = 3;
  Mat M(d, C);
  for (int i = 0; i < d; ++i) {
    double sum = 0.0;
    for (int j = 0; j < C; ++j) {
      M(i, j) = rng.uniform() + 0.05;
      sum += M(i, j);
    }
    for (int j = 0; j < C; ++j) M(i, j) /= sum;
  }
  Mat mu(1, C);
  mu(0, 0) = 0.3; mu(0, 1) = 0.6; mu(0, 2) = 0.45;
  const Mat eps = rng.normal_mat(1, C, 0.1);
  // Keep every coordinate strictly inside the clip interval.
  for (int j = 0; j < C; ++j) {
    const double pre = mu(0, j) + eps(0, j);
    REQUIRE(pre > 1e-3);
    REQUIRE(pre < 1.0 - 1e-3);
  }
  const Mat w = rng.normal_mat(1, d);

  auto scalar = [&](const Mat& m) {
    const Mat z = gates::clipped_gates(m, eps);
    const Mat zhat = gates::feature_weights(M, z);
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += w(0, i) * zhat(0, i);
    return s;
  };

  // analytic: d s / d mu_j = sum_i w_i M_ij (identity through the open clip)
  for (int j = 0; j < C; ++j) {
    double analytic = 0.0;
    for (int i = 0; i < d; ++i) analytic += w(0, i) * M(i, j);
    Mat probe = mu;
    const double h = 1e-6;
    probe(0, j) += h;
    const double up = scalar(probe);
    probe(0, j) -= 2 * h;
    const double down = scalar(probe);
    const double fd = (up - down) / (2 * h);
    CHECK(std::abs(fd - analytic) / std::max({std::abs(fd), std::abs(analytic), 1e-8}) <= 1e-4);
  }
}
