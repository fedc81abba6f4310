#pragma once

#include <vector>

#include "cady/env/environment.hpp"
#include "cady/planning/dynamics.hpp"
#include "cady/planning/mpc.hpp"
#include "cady/planning/objective.hpp"
#include "cady/planning/planners.hpp"
#include "cady/training/trainer.hpp"

namespace cady::training {

struct MbrlConfig {
  std::size_t trials = 20;
  TrainConfig train;
  causal::AttributionConfig attribution;
  double rho_min = 0.02;
  planning::Propagation propagation = planning::Propagation::SampleGaussian;
};

struct MbrlResult {
  model::CadyModel contribution;  // f^C of the last retraining; the dense baseline
  model::CadyModel dynamics;      // f^D
  causal::EdgeProbMatrix edge_probs;
  TransitionDataset dataset;
  std::vector<double> rewards;  // one per trial, trial 0 random
  std::vector<std::size_t> episode_lengths;
};

/// Trial 0 runs a uniformly random policy. Every later trial retrains f^C
/// from scratch on all data, re-estimates p^D, retrains f^D, then collects
/// one episode with `planner` acting on f^D.
MbrlResult mbrl_loop(env::Environment& env, planning::Planner& planner, planning::Objective& objective,
                     const model::ModelSpec& spec, const MbrlConfig& cfg, Rng& rng);

/// Appends every executed transition of an episode. Rows carry the
/// commanded action.
void append_episode(TransitionDataset& data, const std::vector<planning::TrajectoryRow>& rows, std::size_t trial);

}  // namespace cady::training
