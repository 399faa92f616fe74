#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include <json.hpp>

#include "groupfs/cli.hpp"

using nlohmann::json;
namespace cli = groupfs::cli;

namespace {

// --config points at a JSON file whose keys override the flag values.
json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  json j;
  in >> j;
  return j;
}

template <typename T>
void override_if(const json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GroupFS: unsupervised feature selection over learned feature groups"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON file overriding flags")->expected(1);

  cli::GenerateOpts gen;
  auto* sgen = app.add_subcommand("generate", "synthetic two-moons benchmark");
  sgen->add_option("--n", gen.n, "samples");
  sgen->add_option("--d", gen.d, "total features (>= 10)");
  sgen->add_option("--rho", gen.rho, "correlation strength");
  sgen->add_option("--noise", gen.noise, "moons noise std");
  sgen->add_option("--seed", gen.seed, "rng seed");
  sgen->add_option("--out", gen.out_dir, "output directory");

  cli::ChooseCOpts cc;
  auto* scc = app.add_subcommand("choose-c", "group-count heuristic curve");
  scc->add_option("--data", cc.data_csv, "input CSV")->required();
  std::string cc_label;
  scc->add_option("--label-col", cc_label, "label column to drop");
  scc->add_option("--c-max", cc.c_max, "largest candidate C");
  scc->add_option("--k", cc.K, "kernel neighbors");
  scc->add_option("--seed", cc.seed, "rng seed");
  scc->add_option("--out", cc.out_dir, "output directory");

  cli::TrainOpts tr;
  std::string tr_label, tr_sweep;
  bool tr_beta_set = false;
  auto* str = app.add_subcommand("train", "train a GroupFS model");
  str->add_option("--data", tr.data_csv, "input CSV")->required();
  str->add_option("--label-col", tr_label, "label column to drop");
  str->add_option("--c", tr.c, "group count or 'auto'");
  str->add_option("--c-max", tr.c_max, "auto-mode ceiling");
  str->add_option("--epochs", tr.train.epochs, "training epochs");
  str->add_option("--batch", tr.train.batch_size, "batch size");
  str->add_option("--lambda1", tr.train.lambda1, "feature-smoothness weight");
  str->add_option("--lambda2", tr.train.lambda2, "group-sparsity weight");
  auto* beta_opt = str->add_option("--beta", tr.train.beta, "orthogonality weight (default 1/lambda1)");
  str->add_option("--t", tr.train.t, "diffusion steps");
  str->add_option("--k", tr.train.K, "kernel neighbors");
  str->add_option("--sigma", tr.train.sigma, "gate noise std");
  str->add_option("--lr", tr.train.lr, "Adam learning rate");
  str->add_option("--p-main", tr.train.p_main, "warm-start main mass");
  str->add_option("--start-t", tr.train.start_t, "initial temperature");
  str->add_option("--min-t", tr.train.min_t, "final temperature");
  str->add_option("--lambda2-sweep", tr_sweep, "lo:hi:steps sweep over lambda2");
  str->add_option("--seed", tr.seed, "rng seed");
  str->add_option("--out", tr.out_dir, "output directory");
  str->add_option("--log-every", tr.log_every, "epoch logging stride (0 = off)");
  str->add_option("--workers", tr.workers, "sweep worker pool size");

  auto* ssw = app.add_subcommand("sweep", "lambda2 sweep (train with --lambda2-sweep)");
  cli::TrainOpts sw;
  std::string sw_label, sw_range = "0.5:2:4";
  auto* sw_beta_opt = ssw->add_option("--beta", sw.train.beta, "orthogonality weight");
  ssw->add_option("--data", sw.data_csv, "input CSV")->required();
  ssw->add_option("--label-col", sw_label, "label column to drop");
  ssw->add_option("--c", sw.c, "group count or 'auto'");
  ssw->add_option("--c-max", sw.c_max, "auto-mode ceiling");
  ssw->add_option("--epochs", sw.train.epochs, "training epochs");
  ssw->add_option("--batch", sw.train.batch_size, "batch size");
  ssw->add_option("--lambda1", sw.train.lambda1, "feature-smoothness weight");
  ssw->add_option("--range", sw_range, "lo:hi:steps")->required();
  ssw->add_option("--seed", sw.seed, "rng seed");
  ssw->add_option("--out", sw.out_dir, "output directory");
  ssw->add_option("--workers", sw.workers, "worker pool size");

  cli::SelectOpts se;
  auto* sse = app.add_subcommand("select", "rank groups and select a feature budget");
  sse->add_option("--checkpoint", se.checkpoint_path, "trained checkpoint")->required();
  sse->add_option("--rule", se.rule, "groups | min-features | max-features");
  sse->add_option("--value", se.value, "budget value");
  sse->add_option("--out", se.out_path, "selection JSON path");

  cli::EvalOpts ev;
  std::string ev_label;
  auto* sev = app.add_subcommand("eval", "clustering and group-recovery metrics");
  sev->add_option("--data", ev.data_csv, "input CSV")->required();
  sev->add_option("--label-col", ev_label, "label column in the CSV");
  sev->add_option("--meta", ev.meta_json, "meta JSON with labels/true_groups");
  sev->add_option("--selection", ev.selection_json, "selection JSON")->required();
  sev->add_option("--k", ev.k, "clusters (default: number of classes)");
  sev->add_option("--seeds", ev.seeds, "k-means seeds");
  sev->add_option("--out", ev.out_path, "metrics JSON path");

  cli::GradcheckOpts gc;
  auto* sgc = app.add_subcommand("gradcheck", "finite-difference gradient verification");
  sgc->add_option("--n", gc.n, "samples");
  sgc->add_option("--d", gc.d, "features");
  sgc->add_option("--c", gc.C, "groups");
  sgc->add_option("--seed", gc.seed, "rng seed");
  sgc->add_option("--tol", gc.tol, "max relative error");

  CLI11_PARSE(app, argc, argv);

  try {
    json cfg;
    if (!config_path.empty()) cfg = load_config(config_path);

    if (sgen->parsed()) {
      override_if(cfg, "n", gen.n);
      override_if(cfg, "d", gen.d);
      override_if(cfg, "rho", gen.rho);
      override_if(cfg, "noise", gen.noise);
      override_if(cfg, "seed", gen.seed);
      override_if(cfg, "out", gen.out_dir);
      return cli::cmd_generate(gen);
    }
    if (scc->parsed()) {
      if (!cc_label.empty()) cc.label_col = cc_label;
      override_if(cfg, "c_max", cc.c_max);
      override_if(cfg, "seed", cc.seed);
      return cli::cmd_choose_c(cc);
    }
    if (str->parsed()) {
      if (!tr_label.empty()) tr.label_col = tr_label;
      if (!tr_sweep.empty()) tr.lambda2_sweep = tr_sweep;
      tr.beta_explicit = beta_opt->count() > 0;
      override_if(cfg, "c", tr.c);
      override_if(cfg, "epochs", tr.train.epochs);
      override_if(cfg, "batch", tr.train.batch_size);
      override_if(cfg, "lambda1", tr.train.lambda1);
      override_if(cfg, "lambda2", tr.train.lambda2);
      if (cfg.contains("beta")) {
        tr.train.beta = cfg.at("beta").get<double>();
        tr.beta_explicit = true;
      }
      override_if(cfg, "t", tr.train.t);
      override_if(cfg, "k", tr.train.K);
      override_if(cfg, "sigma", tr.train.sigma);
      override_if(cfg, "lr", tr.train.lr);
      override_if(cfg, "p_main", tr.train.p_main);
      override_if(cfg, "start_t", tr.train.start_t);
      override_if(cfg, "min_t", tr.train.min_t);
      override_if(cfg, "seed", tr.seed);
      override_if(cfg, "out", tr.out_dir);
      if (cfg.contains("lambda2_sweep"))
        tr.lambda2_sweep = cfg.at("lambda2_sweep").get<std::string>();
      return cli::cmd_train(tr);
    }
    if (ssw->parsed()) {
      if (!sw_label.empty()) sw.label_col = sw_label;
      sw.lambda2_sweep = sw_range;
      sw.beta_explicit = sw_beta_opt->count() > 0;
      sw.log_every = 0;
      return cli::cmd_train(sw);
    }
    if (sse->parsed()) {
      override_if(cfg, "rule", se.rule);
      override_if(cfg, "value", se.value);
      return cli::cmd_select(se);
    }
    if (sev->parsed()) {
      if (!ev_label.empty()) ev.label_col = ev_label;
      override_if(cfg, "k", ev.k);
      override_if(cfg, "seeds", ev.seeds);
      return cli::cmd_eval(ev);
    }
    if (sgc->parsed()) {
      override_if(cfg, "n", gc.n);
      override_if(cfg, "d", gc.d);
      override_if(cfg, "c", gc.C);
      override_if(cfg, "seed", gc.seed);
      return cli::cmd_gradcheck(gc);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
