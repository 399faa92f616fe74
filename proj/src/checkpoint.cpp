#include "groupfs/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

namespace groupfs::checkpoint {

using nlohmann::json;

namespace {

json mat_to_json(const Mat& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat mat_from_json(const json& j) {
  const int r = static_cast<int>(j.size());
  const int c = r ? static_cast<int>(j.at(0).size()) : 0;
  Mat m(r, c);
  for (int i = 0; i < r; ++i) {
    if (static_cast<int>(j.at(i).size()) != c)
      throw std::runtime_error("checkpoint: ragged matrix in JSON");
    for (int jj = 0; jj < c; ++jj) m(i, jj) = j.at(i).at(jj).get<double>();
  }
  return m;
}

}  // namespace

void save(const Checkpoint& ck, const std::string& path) {
  json j;
  j["schema_version"] = ck.schema_version;
  j["seed"] = ck.seed;
  j["best_epoch"] = ck.best_epoch;
  j["config"] = {
      {"C", ck.config.C},           {"epochs", ck.config.epochs},
      {"batch_size", ck.config.batch_size}, {"lambda1", ck.config.lambda1},
      {"lambda2", ck.config.lambda2}, {"beta", ck.config.beta},
      {"t", ck.config.t},           {"K", ck.config.K},
      {"sigma", ck.config.sigma},   {"lr", ck.config.lr},
      {"p_main", ck.config.p_main}, {"start_t", ck.config.start_t},
      {"min_t", ck.config.min_t},
  };
  j["final_loss"] = {
      {"total", ck.final_terms.total},
      {"smooth", ck.final_terms.smooth},
      {"feature", ck.final_terms.feature},
      {"sparsity", ck.final_terms.sparsity},
  };
  j["logits"] = mat_to_json(ck.params.logits);
  j["mu"] = mat_to_json(ck.params.mu);
  j["Q"] = mat_to_json(ck.params.Q);

  std::ofstream out(path);
  if (!out) throw std::runtime_error("checkpoint: cannot open " + path);
  out << j.dump(1) << '\n';
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

Checkpoint load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  json j;
  in >> j;
  Checkpoint ck;
  ck.schema_version = j.at("schema_version").get<int>();
  if (ck.schema_version != kSchemaVersion)
    throw std::runtime_error("checkpoint: unsupported schema version " +
                             std::to_string(ck.schema_version));
  ck.seed = j.at("seed").get<uint64_t>();
  ck.best_epoch = j.at("best_epoch").get<int>();
  const json& c = j.at("config");
  ck.config.C = c.at("C").get<int>();
  ck.config.epochs = c.at("epochs").get<int>();
  ck.config.batch_size = c.at("batch_size").get<int>();
  ck.config.lambda1 = c.at("lambda1").get<double>();
  ck.config.lambda2 = c.at("lambda2").get<double>();
  ck.config.beta = c.at("beta").get<double>();
  ck.config.t = c.at("t").get<int>();
  ck.config.K = c.at("K").get<int>();
  ck.config.sigma = c.at("sigma").get<double>();
  ck.config.lr = c.at("lr").get<double>();
  ck.config.p_main = c.at("p_main").get<double>();
  ck.config.start_t = c.at("start_t").get<double>();
  ck.config.min_t = c.at("min_t").get<double>();
  const json& f = j.at("final_loss");
  ck.final_terms.total = f.at("total").get<double>();
  ck.final_terms.smooth = f.at("smooth").get<double>();
  ck.final_terms.feature = f.at("feature").get<double>();
  ck.final_terms.sparsity = f.at("sparsity").get<double>();
  ck.params.logits = mat_from_json(j.at("logits"));
  ck.params.mu = mat_from_json(j.at("mu"));
  ck.params.Q = mat_from_json(j.at("Q"));
  return ck;
}

}  // namespace groupfs::checkpoint
