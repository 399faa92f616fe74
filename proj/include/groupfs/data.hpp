#pragma once

#include <optional>
#include <string>
#include <vector>

#include "groupfs/mat.hpp"
#include "groupfs/rng.hpp"

namespace groupfs::data {

struct SyntheticSpec {
  int N = 1000;
  int d = 20;                    // >= 10: two 5-feature blocks + d-10 noise features
  double rho = 0.95;             // correlation strength in (0, 1]
  double moons_noise_std = 0.05;
  uint64_t seed = 0;
};

struct Dataset {
  Mat X;
  std::vector<int> labels;                    // empty when absent
  std::vector<std::vector<int>> true_groups;  // empty when absent
  std::vector<std::string> feature_names;     // empty when absent
};

struct TwoMoons {
  Mat X;  // N x 2, both coordinates standardized
  std::vector<int> labels;
};

/// Interleaved unit half-circles (second arc flipped and shifted) plus
/// isotropic Gaussian noise, then per-coordinate standardization.
TwoMoons two_moons(int N, double noise_std, uint64_t seed);

/// Pre-standardization construction, exposed for geometry tests.
Mat two_moons_raw(int N, double noise_std, Rng& rng);

/// Features 0-4 track coordinate 0 and 5-9 coordinate 1 via
/// y = sqrt(rho) x + sqrt(1-rho) eps; features 10..d-1 are iid N(0,1).
/// The final matrix is z-scored.
Dataset extend_moons(const Mat& base, int d, double rho, uint64_t seed);

/// two_moons + extend_moons with labels attached.
Dataset make_synthetic(const SyntheticSpec& spec);

/// Column-wise standardization (population std). Constant columns are left
/// all-zero after centering; their indices are reported and a warning goes to
/// stderr.
Mat zscore(const Mat& X, std::vector<int>* constant_cols = nullptr);

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Rectangular numeric CSV with a header row. An optional label column is
/// pulled out and label-encoded in first-occurrence order.
Dataset load_csv(const std::string& path,
                 const std::optional<std::string>& label_column = std::nullopt);

void save_csv(const std::string& path, const Mat& X,
              const std::vector<std::string>& column_names = {});

}  // namespace groupfs::data
