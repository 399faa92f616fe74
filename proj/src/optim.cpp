#include "groupfs/optim.hpp"

#include <algorithm>
#include <cmath>

#include "groupfs/graph.hpp"
#include "groupfs/kernels.hpp"
#include "groupfs/linalg.hpp"

namespace groupfs::optim {

AdamState::AdamState(const ParamSet& shapes, AdamConfig config)
    : cfg(config),
      m_logits(shapes.logits.rows(), shapes.logits.cols()),
      v_logits(shapes.logits.rows(), shapes.logits.cols()),
      m_mu(shapes.mu.rows(), shapes.mu.cols()),
      v_mu(shapes.mu.rows(), shapes.mu.cols()),
      m_Q(shapes.Q.rows(), shapes.Q.cols()),
      v_Q(shapes.Q.rows(), shapes.Q.cols()) {}

namespace {

void adam_update(Mat& p, const Mat& g, Mat& m, Mat& v, const AdamConfig& cfg, long t) {
  require(p.same_shape(g), "adam_step: gradient shape mismatch");
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (size_t k = 0; k < p.size(); ++k) {
    m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g[k];
    v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g[k] * g[k];
    const double mhat = m[k] / bc1;
    const double vhat = v[k] / bc2;
    p[k] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
  }
}

void check_finite(const Mat& g, const char* name) {
  for (int i = 0; i < g.rows(); ++i)
    for (int j = 0; j < g.cols(); ++j)
      if (!std::isfinite(g(i, j)))
        throw NumericalError(std::string("backward: non-finite gradient in ") + name + " at (" +
                             std::to_string(i) + "," + std::to_string(j) + ")");
}

Mat gather_rows(const Mat& X, const std::vector<int>& idx, int from, int to) {
  Mat out(to - from, X.cols());
  for (int r = from; r < to; ++r) {
    const double* src = X.row(idx[r]);
    double* dst = out.row(r - from);
    for (int j = 0; j < X.cols(); ++j) dst[j] = src[j];
  }
  return out;
}

}  // namespace

void adam_step(ParamSet& params, const ParamSet& grads, AdamState& state) {
  state.step_count += 1;
  adam_update(params.logits, grads.logits, state.m_logits, state.v_logits, state.cfg,
              state.step_count);
  adam_update(params.mu, grads.mu, state.m_mu, state.v_mu, state.cfg, state.step_count);
  adam_update(params.Q, grads.Q, state.m_Q, state.v_Q, state.cfg, state.step_count);
}

ParamSet backward(ad::Tape& tape, ad::Var loss, ad::Var logits, ad::Var mu, ad::Var Q) {
  tape.backward(loss);
  ParamSet grads;
  auto take = [&](ad::Var v, const char* name) {
    Mat g = tape.grad(v);
    if (g.empty()) g = Mat(tape.value(v).rows(), tape.value(v).cols());
    check_finite(g, name);
    return g;
  };
  grads.logits = take(logits, "logits");
  grads.mu = take(mu, "mu");
  grads.Q = take(Q, "Q");
  return grads;
}

TrainResult train(const Mat& X_zscored, const TrainConfig& cfg, Rng& rng,
                  const EpochCallback& on_epoch) {
  const int N = X_zscored.rows(), d = X_zscored.cols();
  require(cfg.C >= 2, "train: C must be >= 2");
  require(cfg.C <= d, "train: C must be <= d");
  require(cfg.epochs >= 1, "train: epochs must be >= 1");
  require(X_zscored.all_finite(), "train: non-finite input");
  const int B = std::min(cfg.batch_size, N);
  require(B >= cfg.K + 1, "train: batch size must be at least K+1");

  losses::LossConfig lcfg;
  lcfg.lambda1 = cfg.lambda1;
  lcfg.lambda2 = cfg.lambda2;
  lcfg.beta = cfg.beta;
  lcfg.t = cfg.t;
  lcfg.K = cfg.K;

  const losses::FeatureGraph fg = losses::build_feature_graph(X_zscored, cfg.K);

  // Warm start from spectral clustering of the feature graph.
  const std::vector<int> warm = graph::spectral_cluster(fg.L_feat, cfg.C, rng);
  ParamSet params;
  params.logits = grouping::init_logits(warm, cfg.C, cfg.p_main);
  params.mu = Mat(1, cfg.C, 0.5);
  // Q: random orthonormal with rows scaled inversely to warm-start cluster
  // sizes, so every cluster starts with comparable influence on F.
  params.Q = linalg::orthonormalize(rng.normal_mat(cfg.C, cfg.C));
  {
    std::vector<int> counts(cfg.C, 0);
    for (int lab : warm) counts[lab]++;
    for (int j = 0; j < cfg.C; ++j) {
      const double s = (static_cast<double>(d) / cfg.C) / std::max(counts[j], 1);
      for (int k = 0; k < cfg.C; ++k) params.Q(j, k) *= s;
    }
  }

  AdamConfig acfg;
  acfg.lr = cfg.lr;
  AdamState adam(params, acfg);
  const grouping::TemperatureSchedule sched(cfg.start_t, cfg.min_t, cfg.epochs);

  TrainResult result;
  result.model.params = params;
  double best_total = std::numeric_limits<double>::infinity();

  for (int e = 0; e < cfg.epochs; ++e) {
    const double T = grouping::temperature_at(sched, e);
    const std::vector<int> perm = rng.permutation(N);

    // Batch boundaries; a tail shorter than K+1 merges into its predecessor.
    std::vector<int> starts;
    for (int s = 0; s < N; s += B) starts.push_back(s);
    if (starts.size() > 1 && N - starts.back() < cfg.K + 1) starts.pop_back();

    losses::LossTerms epoch_sum;
    int n_batches = 0;
    for (size_t bi = 0; bi < starts.size(); ++bi) {
      const int from = starts[bi];
      const int to = bi + 1 < starts.size() ? starts[bi + 1] : N;
      const Mat XB = gather_rows(X_zscored, perm, from, to);
      const Mat G = rng.gumbel_mat(d, cfg.C);
      const Mat eps = rng.normal_mat(1, cfg.C, cfg.sigma);

      ad::Tape tape;
      const ad::Var logits_v = tape.param(params.logits);
      const ad::Var mu_v = tape.param(params.mu);
      const ad::Var Q_v = tape.param(params.Q);
      losses::LossVars vars;
      ParamSet grads;
      try {
        vars = losses::build_total_loss(tape, logits_v, mu_v, Q_v, XB, G, eps, T, cfg.sigma,
                                        fg, lcfg, losses::AssignmentMode::StraightThrough);
        const double total = tape.value(vars.total)(0, 0);
        if (!std::isfinite(total)) throw NumericalError("train: non-finite loss");
        grads = backward(tape, vars.total, logits_v, mu_v, Q_v);
      } catch (const NumericalError& err) {
        result.aborted = true;
        result.abort_reason = err.what();
        return result;  // last good snapshot is already in result.model
      }
      adam_step(params, grads, adam);

      epoch_sum.smooth += tape.value(vars.smooth)(0, 0);
      epoch_sum.feature += tape.value(vars.feature)(0, 0);
      epoch_sum.sparsity += tape.value(vars.sparsity)(0, 0);
      epoch_sum.total += tape.value(vars.total)(0, 0);
      ++n_batches;
    }

    losses::LossTerms mean;
    mean.smooth = epoch_sum.smooth / n_batches;
    mean.feature = epoch_sum.feature / n_batches;
    mean.sparsity = epoch_sum.sparsity / n_batches;
    mean.total = epoch_sum.total / n_batches;

    EpochStats stats;
    stats.epoch = e;
    stats.total = mean.total;
    stats.smooth = mean.smooth;
    stats.feature_weighted = cfg.lambda1 * mean.feature;
    stats.sparsity_weighted = cfg.lambda2 * mean.sparsity;
    stats.temperature = T;
    result.history.push_back(stats);
    if (on_epoch) on_epoch(stats);

    if (mean.total < best_total) {
      best_total = mean.total;
      result.model.params = params;
      result.model.best = mean;
      result.model.best_epoch = e;
    }
  }
  return result;
}

GradCheckReport gradcheck(int n, int d, int C, uint64_t seed, double fd_step,
                          const std::function<void(ParamSet&)>& tamper) {
  require(n >= 2 && d >= 2 && C >= 2, "gradcheck: degenerate instance");
  Rng rng(seed);
  losses::LossConfig cfg;
  cfg.lambda1 = 1.0;
  cfg.lambda2 = 1.0;
  cfg.beta = 1.0;
  cfg.t = 2;
  cfg.K = std::min(7, n - 1);
  const double sigma = 0.5;
  const double temperature = 1.0;

  Mat X = rng.normal_mat(n, d);
  // z-score columns so the instance matches training inputs
  for (int j = 0; j < d; ++j) {
    double mean = 0.0, var = 0.0;
    for (int i = 0; i < n; ++i) mean += X(i, j);
    mean /= n;
    for (int i = 0; i < n; ++i) var += (X(i, j) - mean) * (X(i, j) - mean);
    const double sd = std::sqrt(var / n);
    for (int i = 0; i < n; ++i) X(i, j) = (X(i, j) - mean) / sd;
  }
  // The feature graph sees d points, so its neighbor count caps at d-1.
  const losses::FeatureGraph fg = losses::build_feature_graph(X, std::min(cfg.K, d - 1));

  ParamSet params;
  params.logits = rng.normal_mat(d, C);
  params.mu = Mat(1, C);
  for (int j = 0; j < C; ++j) params.mu(0, j) = 0.4 + 0.4 * rng.normal();
  params.Q = rng.normal_mat(C, C);
  const Mat G = rng.gumbel_mat(d, C);
  const Mat eps = rng.normal_mat(1, C, sigma);

  ad::Tape tape;
  const ad::Var logits_v = tape.param(params.logits);
  const ad::Var mu_v = tape.param(params.mu);
  const ad::Var Q_v = tape.param(params.Q);
  const losses::LossVars vars =
      losses::build_total_loss(tape, logits_v, mu_v, Q_v, X, G, eps, temperature, sigma, fg,
                               cfg, losses::AssignmentMode::Relaxed);
  ParamSet analytic = backward(tape, vars.total, logits_v, mu_v, Q_v);

  // The bandwidths are stop-gradient, so probe evaluations pin them at the
  // base point; otherwise FD would differentiate a different function.
  const std::vector<double> gamma0 = vars.bandwidths;
  auto forward = [&](const ParamSet& p) {
    ad::Tape probe;
    const losses::LossVars pv = losses::build_total_loss(
        probe, probe.constant(p.logits), probe.constant(p.mu), probe.constant(p.Q), X, G, eps,
        temperature, sigma, fg, cfg, losses::AssignmentMode::Relaxed, &gamma0);
    return probe.value(pv.total)(0, 0);
  };
  if (tamper) tamper(analytic);

  GradCheckReport report;
  auto check_param = [&](const char* name, Mat ParamSet::*field) {
    const Mat& g = analytic.*field;
    GradCheckReport::Entry worst;
    worst.param = name;
    worst.rel_err = -1.0;
    for (int i = 0; i < g.rows(); ++i) {
      for (int j = 0; j < g.cols(); ++j) {
        if (field == &ParamSet::mu) {
          const double pre = params.mu(0, j) + eps(0, j);
          if (std::abs(pre) <= 1e-3 || std::abs(pre - 1.0) <= 1e-3) {
            report.skipped_clip++;
            continue;
          }
        }
        ParamSet probe = params;
        (probe.*field)(i, j) += fd_step;
        const double up = forward(probe);
        (probe.*field)(i, j) -= 2.0 * fd_step;
        const double down = forward(probe);
        const double fd = (up - down) / (2.0 * fd_step);
        const double denom = std::max(std::abs(fd), std::abs(g(i, j)));
        const double err = denom < 1e-7 ? 0.0 : std::abs(fd - g(i, j)) / denom;
        report.checked++;
        if (err > worst.rel_err) {
          worst.rel_err = err;
          worst.i = i;
          worst.j = j;
          worst.analytic = g(i, j);
          worst.fd = fd;
        }
        report.max_rel_err = std::max(report.max_rel_err, err);
      }
    }
    if (worst.rel_err >= 0.0) report.worst.push_back(worst);
  };
  check_param("logits", &ParamSet::logits);
  check_param("mu", &ParamSet::mu);
  check_param("Q", &ParamSet::Q);
  return report;
}

}  // namespace groupfs::optim
