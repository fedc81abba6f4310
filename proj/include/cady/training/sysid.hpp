#pragma once

#include "cady/env/diffdrive.hpp"
#include "cady/training/dataset.hpp"

namespace cady::training {

struct SysidConfig {
  std::size_t transitions = 10000;
  std::size_t episode_length = 100;
  double position_range = 5.0;  // start x, y ~ U(-range, range)

  void validate() const;
};

/// Diff-drive rollouts with uniformly random controls from uniformly random
/// poses. Each rollout is tagged as its own trial.
TransitionDataset generate_sysid_dataset(const env::DiffDriveParams& params, const SysidConfig& cfg, Rng& rng);

}  // namespace cady::training
