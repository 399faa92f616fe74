#include <doctest.h>

#include <cmath>

#include "groupfs/graph.hpp"
#include "groupfs/kernels.hpp"
#include "groupfs/linalg.hpp"
#include "groupfs/losses.hpp"
#include "groupfs/rng.hpp"

using groupfs::Mat;
using groupfs::Rng;
namespace losses = groupfs::losses;
namespace gates = groupfs::gates;
namespace graph = groupfs::graph;
namespace grouping = groupfs::grouping;

namespace {

losses::LossConfig small_cfg() {
  losses::LossConfig cfg;
  cfg.K = 2;
  cfg.t = 2;
  return cfg;
}

}  // namespace

TEST_CASE("sample_smoothness") {
  SUBCASE("all-zero features give zero loss") {
    losses::LossConfig cfg = small_cfg();
    CHECK(losses::sample_smoothness(Mat(6, 4), cfg) == doctest::Approx(0.0));
  }
  SUBCASE("a cluster-aligned column is smoother than a noise column of equal norm") {
    // 6-sample toy, two far clusters {0,1,2} and {3,4,5} anchored by the
    // first column; the second column is either aligned with the clusters or
    // an equal-norm alternating pattern.
    losses::LossConfig cfg = small_cfg();
    cfg.t = 1;
    const double jit[6] = {0.01, -0.02, 0.015, -0.01, 0.02, -0.015};
    Mat aligned(6, 2), noisy(6, 2);
    const double alt[6] = {1.0, -1.0, 1.0, -1.0, 1.0, -1.0};
    for (int i = 0; i < 6; ++i) {
      const double anchor = (i < 3 ? -1.0 : 1.0) + jit[i];
      aligned(i, 0) = noisy(i, 0) = anchor;
      aligned(i, 1) = (i < 3 ? -1.0 : 1.0) + jit[5 - i];
      noisy(i, 1) = alt[i];
    }
    const double aligned_loss = losses::sample_smoothness(aligned, cfg);
    const double noisy_loss = losses::sample_smoothness(noisy, cfg);
    CHECK(aligned_loss < noisy_loss);
  }
  SUBCASE("t=2 equals the manual diffusion product") {
    Rng rng(5);
    const Mat X = rng.normal_mat(8, 3);
    losses::LossConfig cfg = small_cfg();
    const graph::AffinityGraph g = groupfs::graph::self_tuning_affinity(X, cfg.K);
    const auto ops = groupfs::graph::graph_operators(g);
    // independent dense-product oracle
    Mat P2(8, 8);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) {
        double s = 0.0;
        for (int k = 0; k < 8; ++k) s += ops.P(i, k) * ops.P(k, j);
        P2(i, j) = s;
      }
    double tr = 0.0;
    for (int c = 0; c < 3; ++c)
      for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) tr += X(i, c) * P2(i, j) * X(j, c);
    const double expected = -tr / (8.0 * 3.0);
    CHECK(losses::sample_smoothness(X, cfg) == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("degenerate batch of identical rows stays finite") {
    losses::LossConfig cfg = small_cfg();
    Mat X(5, 3, 1.0);
    const double v = losses::sample_smoothness(X, cfg);
    CHECK(std::isfinite(v));
  }
}

TEST_CASE("feature_embedding") {
  SUBCASE("one-hot balanced M with identity Q gives +-0.5 entries") {
    Mat M(4, 2);
    M(0, 0) = M(1, 0) = 1.0;
    M(2, 1) = M(3, 1) = 1.0;
    const Mat F = losses::feature_embedding(M, Mat::identity(2));
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 2; ++j) CHECK(std::abs(F(i, j)) == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("nonzero columns end up zero-mean unit-norm") {
    Rng rng(7);
    const Mat F = losses::feature_embedding(rng.normal_mat(9, 4), rng.normal_mat(4, 4));
    for (int j = 0; j < 4; ++j) {
      double mean = 0.0, norm = 0.0;
      for (int i = 0; i < 9; ++i) {
        mean += F(i, j);
        norm += F(i, j) * F(i, j);
      }
      CHECK(std::abs(mean / 9.0) <= 1e-10);
      CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
  SUBCASE("Q = 0 annihilates") {
    Rng rng(9);
    const Mat F = losses::feature_embedding(rng.normal_mat(5, 3), Mat(3, 3));
    for (size_t k = 0; k < F.size(); ++k) CHECK(F[k] == 0.0);
  }
}

TEST_CASE("feature_smoothness") {
  SUBCASE("orthonormal columns against a zero Laplacian vanish") {
    Mat F(4, 2);
    F(0, 0) = F(1, 0) = 0.5;
    F(2, 0) = F(3, 0) = -0.5;
    F(0, 1) = F(2, 1) = 0.5;
    F(1, 1) = F(3, 1) = -0.5;
    CHECK(losses::feature_smoothness(F, Mat(4, 4), 1.0) == doctest::Approx(0.0));
  }
  SUBCASE("eigenvector columns make the trace the sum of the smallest eigenvalues") {
    Rng rng(11);
    const graph::AffinityGraph g =
        groupfs::graph::self_tuning_affinity(rng.normal_mat(7, 3), 2);
    const Mat L = groupfs::graph::graph_operators(g).L_sym;
    Mat vecs;
    std::vector<double> vals;
    groupfs::linalg::eigh(L, vecs, vals);
    const int C = 3;
    Mat F(7, C);
    for (int i = 0; i < 7; ++i)
      for (int c = 0; c < C; ++c) F(i, c) = vecs(i, c);
    const double trace_part = losses::feature_smoothness(F, L, 0.0) * (7.0 * C);
    CHECK(trace_part == doctest::Approx(vals[0] + vals[1] + vals[2]).epsilon(1e-8));
  }
  SUBCASE("duplicated columns pay the hand-computed Gram penalty") {
    // two identical unit columns: F^T F = [[1,1],[1,1]], deviation from I has
    // Frobenius norm^2 = 2
    Mat F(4, 2);
    for (int i = 0; i < 4; ++i) F(i, 0) = F(i, 1) = 0.5;
    const double lf = losses::feature_smoothness(F, Mat(4, 4), 1.0);
    CHECK(lf == doctest::Approx(2.0 / (4.0 * 2.0)).epsilon(1e-12));
  }
  SUBCASE("trace term is nonnegative for a PSD Laplacian") {
    Rng rng(13);
    const graph::AffinityGraph g =
        groupfs::graph::self_tuning_affinity(rng.normal_mat(8, 3), 2);
    const Mat L = groupfs::graph::graph_operators(g).L_sym;
    for (int rep = 0; rep < 20; ++rep) {
      const Mat F = rng.normal_mat(8, 3);
      CHECK(losses::feature_smoothness(F, L, 0.0) >= -1e-8);
    }
  }
  SUBCASE("dimension mismatch rejected") {
    CHECK_THROWS_AS(losses::feature_smoothness(Mat(4, 2), Mat(5, 5), 1.0),
                    std::invalid_argument);
  }
}

TEST_CASE("group_sparsity") {
  SUBCASE("fully open gates on row-stochastic M give 1/C") {
    const int C = 5;
    const Mat M(8, C, 1.0 / C);
    const gates::GateState state{Mat(1, C, 50.0), 0.5};  // Phi ~ 1
    CHECK(losses::group_sparsity(M, state) == doctest::Approx(1.0 / C).epsilon(1e-9));
  }
  SUBCASE("deeply closed gates drive the loss to 0") {
    const Mat M(8, 4, 0.25);
    const gates::GateState state{Mat(1, 4, -50.0), 0.5};
    CHECK(losses::group_sparsity(M, state) == doctest::Approx(0.0));
  }
  SUBCASE("hand case: C=2, uniform M, mu=0") {
    const Mat M(6, 2, 0.5);
    const gates::GateState state{Mat(1, 2, 0.0), 0.5};
    CHECK(losses::group_sparsity(M, state) == doctest::Approx(0.25).epsilon(1e-12));
  }
  SUBCASE("always within [0,1] for random simplex rows") {
    Rng rng(17);
    for (int rep = 0; rep < 100; ++rep) {
      const int C = 2 + static_cast<int>(rng.below(6));
      Mat M(7, C);
      for (int i = 0; i < 7; ++i) {
        double sum = 0.0;
        for (int j = 0; j < C; ++j) {
          M(i, j) = rng.uniform() + 1e-6;
          sum += M(i, j);
        }
        for (int j = 0; j < C; ++j) M(i, j) /= sum;
      }
      gates::GateState state{rng.normal_mat(1, C, 2.0), 0.5};
      const double v = losses::group_sparsity(M, state);
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("total_loss") {
  Rng rng(19);
  const int B = 10, d = 6, C = 3;
  const Mat X = rng.normal_mat(B, d);
  losses::LossConfig cfg = small_cfg();
  const losses::FeatureGraph fg = losses::build_feature_graph(rng.normal_mat(30, d), cfg.K);
  const grouping::GroupingState gs{rng.normal_mat(d, C), 1.3};
  const gates::GateState gate{rng.normal_mat(1, C), 0.5};
  const losses::ProjectionQ proj{rng.normal_mat(C, C)};
  const Mat G = rng.gumbel_mat(d, C);
  const Mat eps = rng.normal_mat(1, C, gate.sigma);

  SUBCASE("zero weights reduce the total to the smoothness term") {
    cfg.lambda1 = 0.0;
    cfg.lambda2 = 0.0;
    const losses::LossTerms t = losses::total_loss(X, gs, gate, proj, fg, cfg, G, eps);
    CHECK(t.total == t.smooth);
  }
  SUBCASE("components recombine exactly") {
    cfg.lambda1 = 1.0;
    cfg.lambda2 = 0.0;
    const losses::LossTerms t = losses::total_loss(X, gs, gate, proj, fg, cfg, G, eps);
    CHECK(t.total == doctest::Approx(t.smooth + t.feature).epsilon(1e-10));
  }
  SUBCASE("doubling lambda2 adds exactly lambda2 * L_reg under frozen noise") {
    cfg.lambda1 = 0.7;
    cfg.lambda2 = 1.3;
    const losses::LossTerms t1 = losses::total_loss(X, gs, gate, proj, fg, cfg, G, eps);
    cfg.lambda2 = 2.6;
    const losses::LossTerms t2 = losses::total_loss(X, gs, gate, proj, fg, cfg, G, eps);
    CHECK(t2.total - t1.total == doctest::Approx(1.3 * t1.sparsity).epsilon(1e-10));
  }
  SUBCASE("deterministic bit-for-bit with identical inputs") {
    const losses::LossTerms a = losses::total_loss(X, gs, gate, proj, fg, cfg, G, eps);
    const losses::LossTerms b = losses::total_loss(X, gs, gate, proj, fg, cfg, G, eps);
    CHECK(a.total == b.total);
    CHECK(a.smooth == b.smooth);
    CHECK(a.feature == b.feature);
    CHECK(a.sparsity == b.sparsity);
  }
  SUBCASE("tape terms match the standalone loss functions") {
    const losses::LossTerms t = losses::total_loss(X, gs, gate, proj, fg, cfg, G, eps);
    const Mat M = grouping::gumbel_softmax(gs.logits, G, gs.temperature);
    const Mat z = gates::clipped_gates(gate.mu, eps);
    const Mat zhat = gates::feature_weights(M, z);
    const Mat Xt = gates::apply_gates(X, zhat);
    CHECK(t.smooth == doctest::Approx(losses::sample_smoothness(Xt, cfg)).epsilon(1e-12));
    const Mat F = losses::feature_embedding(M, proj.Q);
    CHECK(t.feature ==
          doctest::Approx(losses::feature_smoothness(F, fg.L_feat, cfg.beta)).epsilon(1e-12));
    CHECK(t.sparsity == doctest::Approx(losses::group_sparsity(M, gate)).epsilon(1e-12));
  }
}
