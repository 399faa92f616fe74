#include "groupfs/losses.hpp"

#include <cmath>

#include "groupfs/graph.hpp"
#include "groupfs/kernels.hpp"

namespace groupfs::losses {

FeatureGraph build_feature_graph(const Mat& X_zscored, int K) {
  // Feature vectors are the columns; the kernel sees them as points.
  const Mat features = kern::transpose(X_zscored);
  const graph::AffinityGraph g = graph::self_tuning_affinity(features, K);
  return FeatureGraph{graph::graph_operators(g).L_sym};
}

LossVars build_total_loss(ad::Tape& tape, ad::Var logits, ad::Var mu, ad::Var Q,
                          const Mat& X_batch, const Mat& gumbel, const Mat& gate_eps,
                          double temperature, double gate_sigma, const FeatureGraph& fg,
                          const LossConfig& cfg, AssignmentMode mode,
                          const std::vector<double>* fixed_bandwidths) {
  const int B = X_batch.rows();
  const int d = X_batch.cols();
  const int C = tape.value(logits).cols();
  require(tape.value(logits).rows() == d, "build_total_loss: logits/batch dimension mismatch");
  require(tape.value(mu).rows() == 1 && tape.value(mu).cols() == C,
          "build_total_loss: mu must be 1 x C");
  require(tape.value(Q).rows() == C && tape.value(Q).cols() == C,
          "build_total_loss: Q must be C x C");
  require(fg.L_feat.rows() == d && fg.L_feat.cols() == d,
          "build_total_loss: feature graph dimension mismatch");
  require(B >= cfg.K + 1, "build_total_loss: batch smaller than K+1");
  require(temperature > 0.0, "build_total_loss: temperature must be positive");
  require(gate_sigma > 0.0, "build_total_loss: gate sigma must be positive");
  require(cfg.t >= 1, "build_total_loss: diffusion steps must be >= 1");

  // Feature association.
  const ad::Var soft = tape.softmax_rows(
      tape.scale(tape.add(logits, tape.constant(gumbel)), 1.0 / temperature));
  const ad::Var M = mode == AssignmentMode::StraightThrough ? tape.hard_rows_st(soft) : soft;

  // Gates and per-feature weights.
  const ad::Var z = tape.clamp01(tape.add(mu, tape.constant(gate_eps)));
  const ad::Var zhat = tape.transpose(tape.matmul(M, tape.transpose(z)));  // 1 x d
  const ad::Var Xt = tape.colscale(tape.constant(X_batch), zhat);

  // Sample graph on the gated batch; bandwidths are stop-gradient.
  const ad::Var S = tape.pairwise_sqdist(Xt);
  const std::vector<double> gamma =
      fixed_bandwidths ? *fixed_bandwidths
                       : graph::self_tuning_bandwidths(tape.value(S), cfg.K);
  require(static_cast<int>(gamma.size()) == B, "build_total_loss: bandwidth count mismatch");
  Mat neg_recip(B, B);
  Mat offdiag_mask(B, B);
  for (int i = 0; i < B; ++i)
    for (int j = 0; j < B; ++j) {
      neg_recip(i, j) = -1.0 / (gamma[i] * gamma[j]);
      offdiag_mask(i, j) = i == j ? 0.0 : 1.0;
    }
  const ad::Var W = tape.mul(tape.exp_elem(tape.mul(S, tape.constant(neg_recip))),
                             tape.constant(offdiag_mask));
  const ad::Var P = tape.row_normalize(W);
  ad::Var Pt = P;
  for (int s = 1; s < cfg.t; ++s) Pt = tape.matmul(Pt, P);
  const ad::Var smooth =
      tape.scale(tape.dot(Xt, tape.matmul(Pt, Xt)), -1.0 / (static_cast<double>(B) * d));

  // Feature-graph smoothness + orthogonality on F = MQ (normalized in-graph).
  const ad::Var F = tape.normalize_cols(tape.center_cols(tape.matmul(M, Q)));
  const ad::Var trace_term = tape.dot(F, tape.matmul(tape.constant(fg.L_feat), F));
  const ad::Var dev = tape.sub(tape.matmul(tape.transpose(F), F), tape.constant(Mat::identity(C)));
  const ad::Var feature =
      tape.scale(tape.add(trace_term, tape.scale(tape.dot(dev, dev), cfg.beta)),
                 1.0 / (static_cast<double>(d) * C));

  // Expected active-gate mass, weighted by group size.
  const ad::Var open_p = tape.gauss_cdf(mu, 1.0 / gate_sigma);
  const ad::Var col_mass =
      tape.scale(tape.matmul(tape.constant(Mat(1, d, 1.0)), M), 1.0 / d);
  const ad::Var sparsity = tape.scale(tape.dot(open_p, col_mass), 1.0 / C);

  LossVars out;
  out.bandwidths = gamma;
  out.assignment = M;
  out.smooth = smooth;
  out.feature = feature;
  out.sparsity = sparsity;
  out.total = tape.add(tape.add(smooth, tape.scale(feature, cfg.lambda1)),
                       tape.scale(sparsity, cfg.lambda2));
  return out;
}

double sample_smoothness(const Mat& X_tilde, const LossConfig& cfg) {
  const int B = X_tilde.rows(), d = X_tilde.cols();
  require(B >= cfg.K + 1, "sample_smoothness: batch smaller than K+1");
  const graph::AffinityGraph g = graph::self_tuning_affinity(X_tilde, cfg.K);
  const graph::GraphOperators ops = graph::graph_operators(g);
  const Mat Pt = graph::diffuse(ops.P, cfg.t);
  const double trace = kern::dot(X_tilde, kern::matmul(Pt, X_tilde));
  return -trace / (static_cast<double>(B) * d);
}

Mat feature_embedding(const Mat& M, const Mat& Q) {
  require(M.cols() == Q.rows(), "feature_embedding: dimension mismatch");
  Mat F = kern::matmul(M, Q);
  const int d = F.rows(), C = F.cols();
  for (int j = 0; j < C; ++j) {
    double mean = 0.0;
    for (int i = 0; i < d; ++i) mean += F(i, j);
    mean /= d;
    double norm = 0.0;
    for (int i = 0; i < d; ++i) {
      F(i, j) -= mean;
      norm += F(i, j) * F(i, j);
    }
    norm = std::sqrt(norm);
    if (norm > 0.0)
      for (int i = 0; i < d; ++i) F(i, j) /= norm;
  }
  return F;
}

double feature_smoothness(const Mat& F, const Mat& L_feat, double beta) {
  require(L_feat.rows() == L_feat.cols() && L_feat.rows() == F.rows(),
          "feature_smoothness: dimension mismatch");
  const int d = F.rows(), C = F.cols();
  const double trace = kern::dot(F, kern::matmul(L_feat, F));
  const Mat dev = kern::sub(kern::matmul_tn(F, F), Mat::identity(C));
  return (trace + beta * kern::frobenius_sq(dev)) / (static_cast<double>(d) * C);
}

double group_sparsity(const Mat& M, const gates::GateState& gate) {
  require(gate.mu.cols() == M.cols(), "group_sparsity: dimension mismatch");
  const Mat p = gates::open_probability(gate);
  const std::vector<double> mass = kern::col_sums(M);
  const int d = M.rows(), C = M.cols();
  double sum = 0.0;
  for (int j = 0; j < C; ++j) sum += p(0, j) * mass[j] / d;
  return sum / C;
}

LossTerms total_loss(const Mat& X_batch, const grouping::GroupingState& gs,
                     const gates::GateState& gate, const ProjectionQ& proj,
                     const FeatureGraph& fg, const LossConfig& cfg, const Mat& gumbel,
                     const Mat& gate_eps, AssignmentMode mode) {
  ad::Tape tape;
  const ad::Var logits = tape.constant(gs.logits);
  const ad::Var mu = tape.constant(gate.mu);
  const ad::Var Q = tape.constant(proj.Q);
  const LossVars vars = build_total_loss(tape, logits, mu, Q, X_batch, gumbel, gate_eps,
                                         gs.temperature, gate.sigma, fg, cfg, mode);
  LossTerms terms;
  terms.smooth = tape.value(vars.smooth)(0, 0);
  terms.feature = tape.value(vars.feature)(0, 0);
  terms.sparsity = tape.value(vars.sparsity)(0, 0);
  terms.total = tape.value(vars.total)(0, 0);
  return terms;
}

}  // namespace groupfs::losses
