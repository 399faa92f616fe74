#pragma once

#include <optional>
#include <string>

#include "groupfs/optim.hpp"

namespace groupfs::cli {

// Relative output paths are resolved against this environment variable when
// it is set; absolute paths pass through.
constexpr const char* kOutputRootEnv = "GROUPFS_OUT_ROOT";

std::string resolve_out(const std::string& path);

struct GenerateOpts {
  int n = 1000;
  int d = 20;
  double rho = 0.95;
  double noise = 0.05;
  uint64_t seed = 0;
  std::string out_dir = ".";
};

struct ChooseCOpts {
  std::string data_csv;
  std::optional<std::string> label_col;
  int c_max = 10;
  int K = 7;
  uint64_t seed = 0;
  std::string out_dir = ".";
};

struct TrainOpts {
  std::string data_csv;
  std::optional<std::string> label_col;
  std::string c = "auto";  // "auto" or an explicit group count
  int c_max = 30;          // ceiling for the auto heuristic
  optim::TrainConfig train;
  bool beta_explicit = false;  // default wires beta = 1 / lambda1
  std::optional<std::string> lambda2_sweep;  // "lo:hi:steps"
  uint64_t seed = 0;
  std::string out_dir = ".";
  int log_every = 50;
  int workers = 0;  // sweep pool size; 0 = hardware concurrency
};

struct SelectOpts {
  std::string checkpoint_path;
  std::string rule = "min-features";  // groups | min-features | max-features
  int value = 10;
  std::string out_path = "selection.json";
};

struct EvalOpts {
  std::string data_csv;
  std::optional<std::string> label_col;
  std::string meta_json;  // optional {labels, true_groups}
  std::string selection_json;
  int k = 0;  // 0 = number of label classes
  int seeds = 10;
  std::string out_path = "metrics.json";
};

struct GradcheckOpts {
  int n = 30;
  int d = 12;
  int C = 4;
  uint64_t seed = 0;
  double tol = 1e-4;
};

int cmd_generate(const GenerateOpts& o);
int cmd_choose_c(const ChooseCOpts& o);
int cmd_train(const TrainOpts& o);
int cmd_select(const SelectOpts& o);
int cmd_eval(const EvalOpts& o);
int cmd_gradcheck(const GradcheckOpts& o);

}  // namespace groupfs::cli
