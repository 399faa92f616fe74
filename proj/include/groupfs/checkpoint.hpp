#pragma once

#include <string>

#include "groupfs/optim.hpp"

namespace groupfs::checkpoint {

constexpr int kSchemaVersion = 1;

struct Checkpoint {
  int schema_version = kSchemaVersion;
  optim::TrainConfig config;
  optim::ParamSet params;
  losses::LossTerms final_terms;
  int best_epoch = -1;
  uint64_t seed = 0;
};

/// JSON on disk; doubles round-trip losslessly.
void save(const Checkpoint& ck, const std::string& path);
Checkpoint load(const std::string& path);

}  // namespace groupfs::checkpoint
