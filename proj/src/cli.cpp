#include "groupfs/cli.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <json.hpp>
#include <omp.h>

#include "groupfs/checkpoint.hpp"
#include "groupfs/data.hpp"
#include "groupfs/eval.hpp"
#include "groupfs/select.hpp"

namespace groupfs::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string resolve_out(const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  const char* root = std::getenv(kOutputRootEnv);
  if (!root || !*root) return path;
  return (fs::path(root) / path).string();
}

namespace {

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << j.dump(1) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

json selection_to_json(const select::SelectionResult& sel) {
  json j;
  j["group_order"] = sel.group_order;
  j["groups"] = sel.groups;
  j["selected"] = sel.selected;
  j["gate_means"] = sel.gate_means;
  j["budget"] = sel.budget;
  j["budget_rule"] = sel.budget_rule;
  j["budget_unmet"] = sel.budget_unmet;
  return j;
}

void write_history_csv(const std::vector<optim::EpochStats>& history, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "epoch,L,L_s,lambda1_L_f,lambda2_L_reg,temperature\n";
  char buf[160];
  for (const auto& h : history) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", h.epoch, h.total,
                  h.smooth, h.feature_weighted, h.sparsity_weighted, h.temperature);
    out << buf;
  }
}

data::Dataset load_meta_into(data::Dataset ds, const std::string& meta_path) {
  if (meta_path.empty()) return ds;
  std::ifstream in(meta_path);
  if (!in) throw std::runtime_error("cannot open " + meta_path);
  json j;
  in >> j;
  if (ds.labels.empty() && j.contains("labels"))
    ds.labels = j.at("labels").get<std::vector<int>>();
  if (j.contains("true_groups"))
    ds.true_groups = j.at("true_groups").get<std::vector<std::vector<int>>>();
  return ds;
}

struct TrainRunOutput {
  optim::TrainResult result;
  optim::TrainConfig config;
  uint64_t seed = 0;
};

void write_run_artifacts(const TrainRunOutput& run, const std::string& dir) {
  fs::create_directories(dir);
  checkpoint::Checkpoint ck;
  ck.config = run.config;
  ck.params = run.result.model.params;
  ck.final_terms = run.result.model.best;
  ck.best_epoch = run.result.model.best_epoch;
  ck.seed = run.seed;
  checkpoint::save(ck, (fs::path(dir) / "checkpoint.json").string());
  write_history_csv(run.result.history, (fs::path(dir) / "loss_history.csv").string());
}

select::BudgetRule parse_rule(const std::string& rule, int value) {
  select::BudgetRule r;
  r.value = value;
  if (rule == "groups")
    r.kind = select::BudgetKind::GroupCount;
  else if (rule == "min-features")
    r.kind = select::BudgetKind::MinFeatures;
  else if (rule == "max-features")
    r.kind = select::BudgetKind::MaxFeatures;
  else
    throw std::invalid_argument("unknown budget rule '" + rule +
                                "' (expected groups|min-features|max-features)");
  return r;
}

}  // namespace

int cmd_generate(const GenerateOpts& o) {
  data::SyntheticSpec spec;
  spec.N = o.n;
  spec.d = o.d;
  spec.rho = o.rho;
  spec.moons_noise_std = o.noise;
  spec.seed = o.seed;
  const data::Dataset ds = data::make_synthetic(spec);

  const std::string dir = resolve_out(o.out_dir);
  fs::create_directories(dir);
  data::save_csv((fs::path(dir) / "X.csv").string(), ds.X);
  json meta;
  meta["labels"] = ds.labels;
  meta["true_groups"] = ds.true_groups;
  meta["classes"] = 2;
  meta["spec"] = {{"n", o.n},       {"d", o.d},       {"rho", o.rho},
                  {"noise", o.noise}, {"seed", o.seed}};
  write_json(meta, (fs::path(dir) / "meta.json").string());
  std::cout << "wrote " << (fs::path(dir) / "X.csv").string() << " ("
            << ds.X.rows() << "x" << ds.X.cols() << ") and meta.json\n";
  return 0;
}

int cmd_choose_c(const ChooseCOpts& o) {
  const data::Dataset ds = data::load_csv(o.data_csv, o.label_col);
  const Mat X = data::zscore(ds.X);
  const losses::FeatureGraph fg = losses::build_feature_graph(X, o.K);
  Rng rng(o.seed);
  const select::ChooseCResult res = select::choose_C(fg.L_feat, o.c_max, rng);

  const std::string dir = resolve_out(o.out_dir);
  fs::create_directories(dir);
  const std::string curve_path = (fs::path(dir) / "choose_c_curve.csv").string();
  std::ofstream out(curve_path);
  out << "C,distortion\n";
  char buf[64];
  for (size_t i = 0; i < res.candidates.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g\n", res.candidates[i], res.scores[i]);
    out << buf;
  }
  std::cout << "chosen_C=" << res.chosen << "\nlocal_minima=";
  for (size_t i = 0; i < res.local_minima.size(); ++i)
    std::cout << (i ? "," : "") << res.local_minima[i];
  std::cout << "\ncurve=" << curve_path << "\n";
  return 0;
}

namespace {

std::vector<double> parse_sweep(const std::string& spec) {
  // lo:hi:steps with uniformly spaced steps, endpoints included
  double lo = 0.0, hi = 0.0;
  int steps = 0;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%d", &lo, &hi, &steps) != 3 || steps < 1 || hi < lo)
    throw std::invalid_argument("bad sweep spec '" + spec + "' (expected lo:hi:steps)");
  std::vector<double> values;
  for (int i = 0; i < steps; ++i)
    values.push_back(steps == 1 ? lo : lo + (hi - lo) * i / (steps - 1));
  return values;
}

}  // namespace

int cmd_train(const TrainOpts& o) {
  const data::Dataset ds = data::load_csv(o.data_csv, o.label_col);
  const Mat X = data::zscore(ds.X);

  optim::TrainConfig cfg = o.train;
  if (!o.beta_explicit) cfg.beta = cfg.lambda1 > 0.0 ? 1.0 / cfg.lambda1 : 1.0;

  if (o.c == "auto") {
    const losses::FeatureGraph fg = losses::build_feature_graph(X, cfg.K);
    Rng crng(o.seed);
    const int cmax = std::min(o.c_max, X.cols());
    const select::ChooseCResult res = select::choose_C(fg.L_feat, cmax, crng);
    cfg.C = res.chosen;
    std::cout << "auto group count: C=" << cfg.C << " (C_max=" << cmax << ")\n";
  } else {
    cfg.C = std::stoi(o.c);
  }

  const std::string dir = resolve_out(o.out_dir);
  fs::create_directories(dir);

  if (!o.lambda2_sweep) {
    Rng rng(o.seed);
    TrainRunOutput run;
    run.config = cfg;
    run.seed = o.seed;
    const auto log_epoch = [&](const optim::EpochStats& h) {
      if (o.log_every > 0 && (h.epoch % o.log_every == 0 || h.epoch == cfg.epochs - 1))
        std::printf(
            "loss epoch=%d total=%.6f smooth=%.6f feature_w=%.6f sparsity_w=%.6f temp=%.4f\n",
            h.epoch, h.total, h.smooth, h.feature_weighted, h.sparsity_weighted, h.temperature);
    };
    run.result = optim::train(X, cfg, rng, log_epoch);
    write_run_artifacts(run, dir);
    if (run.result.aborted) {
      std::cerr << "train aborted: " << run.result.abort_reason
                << " (kept snapshot from epoch " << run.result.model.best_epoch << ")\n";
      return 1;
    }
    std::printf("best epoch %d, loss %.6f -> %s\n", run.result.model.best_epoch,
                run.result.model.best.total, (fs::path(dir) / "checkpoint.json").c_str());
    return 0;
  }

  // Sweep: one run per lambda2 value, worker pool, per-run directories.
  const std::vector<double> values = parse_sweep(*o.lambda2_sweep);
  const int n_runs = static_cast<int>(values.size());
  std::vector<TrainRunOutput> runs(n_runs);
  unsigned pool = o.workers > 0 ? o.workers : std::thread::hardware_concurrency();
  pool = std::max(1u, std::min<unsigned>(pool, n_runs));
  const int omp_per_worker = std::max(1, omp_get_max_threads() / static_cast<int>(pool));

  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  Rng base(o.seed);
  auto worker = [&]() {
    omp_set_num_threads(omp_per_worker);
    for (int i = next.fetch_add(1); i < n_runs; i = next.fetch_add(1)) {
      optim::TrainConfig rc = cfg;
      rc.lambda2 = values[i];
      Rng rng = base.fork(static_cast<uint64_t>(i));
      runs[i].config = rc;
      runs[i].seed = o.seed;
      try {
        runs[i].result = optim::train(X, rc, rng);
      } catch (const std::exception& e) {
        std::cerr << "sweep run " << i << " failed: " << e.what() << "\n";
        failed = true;
        return;
      }
      if (runs[i].result.aborted) failed = true;
    }
  };
  std::vector<std::thread> threads;
  for (unsigned t = 0; t < pool; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  std::vector<int> order(n_runs);
  for (int i = 0; i < n_runs; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return runs[a].result.model.best.total < runs[b].result.model.best.total;
  });

  std::ofstream summary((fs::path(dir) / "sweep_summary.csv").string());
  summary << "rank,run,lambda2,best_loss,best_epoch,dir\n";
  char buf[256];
  for (int r = 0; r < n_runs; ++r) {
    const int i = order[r];
    std::snprintf(buf, sizeof(buf), "sweep_%03d_lambda2_%.6f", i, values[i]);
    const std::string run_dir = (fs::path(dir) / buf).string();
    write_run_artifacts(runs[i], run_dir);
    std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g,%d,", r, i, values[i],
                  runs[i].result.model.best.total, runs[i].result.model.best_epoch);
    summary << buf << run_dir << "\n";
  }
  // Best run doubles as the top-level checkpoint for downstream commands.
  write_run_artifacts(runs[order[0]], dir);
  std::printf("sweep done: %d runs, best lambda2=%.6f loss=%.6f -> %s\n", n_runs,
              runs[order[0]].config.lambda2, runs[order[0]].result.model.best.total,
              (fs::path(dir) / "checkpoint.json").c_str());
  return failed ? 1 : 0;
}

int cmd_select(const SelectOpts& o) {
  const checkpoint::Checkpoint ck = checkpoint::load(o.checkpoint_path);
  optim::TrainedModel model;
  model.params = ck.params;
  model.best = ck.final_terms;
  model.best_epoch = ck.best_epoch;
  const select::SelectionResult sel = rank_and_select(model, parse_rule(o.rule, o.value));
  const std::string path = resolve_out(o.out_path);
  if (!fs::path(path).parent_path().empty())
    fs::create_directories(fs::path(path).parent_path());
  write_json(selection_to_json(sel), path);
  std::cout << "selected " << sel.selected.size() << " features -> " << path;
  if (sel.budget_unmet) std::cout << " (warning: budget unreachable, all groups returned)";
  std::cout << "\n";
  return 0;
}

int cmd_eval(const EvalOpts& o) {
  data::Dataset ds = data::load_csv(o.data_csv, o.label_col);
  ds = load_meta_into(std::move(ds), o.meta_json);
  const Mat X = data::zscore(ds.X);

  std::ifstream sin(o.selection_json);
  if (!sin) throw std::runtime_error("cannot open " + o.selection_json);
  json sj;
  sin >> sj;
  const std::vector<int> selected = sj.at("selected").get<std::vector<int>>();
  std::vector<std::vector<int>> predicted_groups;
  for (const auto& g : sj.at("groups"))
    if (!g.empty()) predicted_groups.push_back(g.get<std::vector<int>>());

  int k = o.k;
  if (k <= 0) {
    require(!ds.labels.empty(), "eval: --k required when the dataset has no labels");
    k = 1 + *std::max_element(ds.labels.begin(), ds.labels.end());
  }

  const eval::MetricReport rep = eval::evaluate_selection(
      X, selected, ds.labels, ds.true_groups, predicted_groups, k, o.seeds);

  json j;
  j["n_selected"] = rep.n_selected;
  auto put = [&](const char* key, const std::optional<double>& v) {
    if (v) j[key] = *v;
  };
  put("accuracy_mean", rep.accuracy_mean);
  put("accuracy_std", rep.accuracy_std);
  put("ari_mean", rep.ari_mean);
  put("ari_std", rep.ari_std);
  put("rg_sim", rep.rg);
  put("tpr", rep.tpr);
  put("fdr", rep.fdr);
  const std::string path = resolve_out(o.out_path);
  if (!fs::path(path).parent_path().empty())
    fs::create_directories(fs::path(path).parent_path());
  write_json(j, path);

  std::printf("%-16s %s\n", "metric", "value");
  std::printf("%-16s %d\n", "n_selected", rep.n_selected);
  auto line = [](const char* name, const std::optional<double>& v) {
    if (v) std::printf("%-16s %.4f\n", name, *v);
  };
  line("accuracy_mean", rep.accuracy_mean);
  line("accuracy_std", rep.accuracy_std);
  line("ari_mean", rep.ari_mean);
  line("ari_std", rep.ari_std);
  line("rg_sim", rep.rg);
  line("tpr", rep.tpr);
  line("fdr", rep.fdr);
  return 0;
}

int cmd_gradcheck(const GradcheckOpts& o) {
  const optim::GradCheckReport rep = optim::gradcheck(o.n, o.d, o.C, o.seed);
  std::printf("gradcheck: %d coordinates checked, %d skipped at clip boundaries\n",
              rep.checked, rep.skipped_clip);
  for (const auto& w : rep.worst)
    std::printf("  %-7s worst at (%d,%d): analytic=%+.9e fd=%+.9e rel_err=%.3e\n",
                w.param.c_str(), w.i, w.j, w.analytic, w.fd, w.rel_err);
  std::printf("max relative error %.3e (tolerance %.1e): %s\n", rep.max_rel_err, o.tol,
              rep.pass(o.tol) ? "PASS" : "FAIL");
  return rep.pass(o.tol) ? 0 : 1;
}

}  // namespace groupfs::cli
