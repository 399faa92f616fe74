#include "groupfs/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace groupfs::data {

Mat two_moons_raw(int N, double noise_std, Rng& rng) {
  require(N >= 4, "two_moons: N must be >= 4");
  require(noise_std >= 0.0, "two_moons: noise_std must be >= 0");
  const int n_out = (N + 1) / 2;
  const int n_in = N - n_out;
  Mat X(N, 2);
  for (int i = 0; i < n_out; ++i) {
    const double t = M_PI * i / (n_out - 1);
    X(i, 0) = std::cos(t);
    X(i, 1) = std::sin(t);
  }
  for (int i = 0; i < n_in; ++i) {
    const double t = M_PI * i / (n_in - 1);
    X(n_out + i, 0) = 1.0 - std::cos(t);
    X(n_out + i, 1) = 0.5 - std::sin(t);
  }
  for (int i = 0; i < N; ++i) {
    X(i, 0) += noise_std * rng.normal();
    X(i, 1) += noise_std * rng.normal();
  }
  return X;
}

TwoMoons two_moons(int N, double noise_std, uint64_t seed) {
  Rng rng(seed);
  TwoMoons out;
  out.X = zscore(two_moons_raw(N, noise_std, rng));
  out.labels.assign(N, 1);
  for (int i = 0; i < (N + 1) / 2; ++i) out.labels[i] = 0;
  return out;
}

Dataset extend_moons(const Mat& base, int d, double rho, uint64_t seed) {
  require(base.cols() == 2, "extend_moons: base must be N x 2");
  require(rho > 0.0 && rho <= 1.0, "extend_moons: rho must be in (0, 1]");
  require(d >= 10, "extend_moons: d must be >= 10");
  const int N = base.rows();
  Rng rng(seed);
  Mat X(N, d);
  const double a = std::sqrt(rho), b = std::sqrt(1.0 - rho);
  for (int f = 0; f < 10; ++f) {
    const int coord = f < 5 ? 0 : 1;
    for (int n = 0; n < N; ++n) X(n, f) = a * base(n, coord) + b * rng.normal();
  }
  for (int f = 10; f < d; ++f)
    for (int n = 0; n < N; ++n) X(n, f) = rng.normal();

  Dataset ds;
  ds.X = zscore(X);
  ds.true_groups = {{0, 1, 2, 3, 4}, {5, 6, 7, 8, 9}};
  return ds;
}

Dataset make_synthetic(const SyntheticSpec& spec) {
  const TwoMoons moons = two_moons(spec.N, spec.moons_noise_std, spec.seed);
  // Distinct stream for the extension so (N, noise) and (d, rho) draws stay
  // decoupled.
  Dataset ds = extend_moons(moons.X, spec.d, spec.rho, Rng(spec.seed).fork(1).next_u64());
  ds.labels = moons.labels;
  return ds;
}

Mat zscore(const Mat& X, std::vector<int>* constant_cols) {
  const int n = X.rows(), m = X.cols();
  require(n >= 1, "zscore: empty matrix");
  Mat out = X;
  for (int j = 0; j < m; ++j) {
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += X(i, j);
    mean /= n;
    double var = 0.0;
    for (int i = 0; i < n; ++i) var += (X(i, j) - mean) * (X(i, j) - mean);
    const double sd = std::sqrt(var / n);
    if (sd <= 1e-13 * std::max(1.0, std::abs(mean))) {
      for (int i = 0; i < n; ++i) out(i, j) = 0.0;
      if (constant_cols) constant_cols->push_back(j);
      std::cerr << "zscore: column " << j << " is constant, zeroed\n";
      continue;
    }
    for (int i = 0; i < n; ++i) out(i, j) = (X(i, j) - mean) / sd;
  }
  return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t");
  size_t b = s.find_last_not_of(" \t");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

}  // namespace

Dataset load_csv(const std::string& path, const std::optional<std::string>& label_column) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("load_csv: empty file " + path);

  const std::vector<std::string> header = split_line(line);
  int label_idx = -1;
  if (label_column) {
    for (size_t j = 0; j < header.size(); ++j)
      if (trim(header[j]) == *label_column) label_idx = static_cast<int>(j);
    if (label_idx < 0)
      throw ParseError("load_csv: label column '" + *label_column + "' not in header");
  }

  Dataset ds;
  for (size_t j = 0; j < header.size(); ++j)
    if (static_cast<int>(j) != label_idx) ds.feature_names.push_back(trim(header[j]));

  std::vector<double> values;
  std::vector<std::string> raw_labels;
  int n_rows = 0;
  const int n_cols = static_cast<int>(header.size());
  for (int row = 2; std::getline(in, line); ++row) {
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    if (static_cast<int>(cells.size()) != n_cols)
      throw ParseError("load_csv: row " + std::to_string(row) + " has " +
                       std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(n_cols));
    for (int j = 0; j < n_cols; ++j) {
      const std::string cell = trim(cells[j]);
      if (j == label_idx) {
        raw_labels.push_back(cell);
        continue;
      }
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw ParseError("load_csv: non-numeric cell '" + cell + "' at row " +
                         std::to_string(row) + ", column " + std::to_string(j + 1));
      values.push_back(v);
    }
    ++n_rows;
  }
  if (n_rows == 0) throw ParseError("load_csv: no data rows in " + path);

  const int n_feat = n_cols - (label_idx >= 0 ? 1 : 0);
  ds.X = Mat(n_rows, n_feat);
  for (int i = 0; i < n_rows; ++i)
    for (int j = 0; j < n_feat; ++j) ds.X(i, j) = values[static_cast<size_t>(i) * n_feat + j];

  if (label_idx >= 0) {
    std::vector<std::string> seen;
    for (const std::string& s : raw_labels) {
      auto it = std::find(seen.begin(), seen.end(), s);
      if (it == seen.end()) {
        seen.push_back(s);
        ds.labels.push_back(static_cast<int>(seen.size()) - 1);
      } else {
        ds.labels.push_back(static_cast<int>(it - seen.begin()));
      }
    }
  }
  return ds;
}

void save_csv(const std::string& path, const Mat& X,
              const std::vector<std::string>& column_names) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_csv: cannot open " + path);
  for (int j = 0; j < X.cols(); ++j) {
    if (j) out << ',';
    if (j < static_cast<int>(column_names.size()))
      out << column_names[j];
    else
      out << 'f' << j;
  }
  out << '\n';
  char buf[40];
  for (int i = 0; i < X.rows(); ++i) {
    for (int j = 0; j < X.cols(); ++j) {
      if (j) out << ',';
      std::snprintf(buf, sizeof(buf), "%.17g", X(i, j));
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("save_csv: write failed for " + path);
}

}  // namespace groupfs::data
