#pragma once

#include <memory>
#include <optional>
#include <string>

#include "cady/env/environment.hpp"
#include "cady/harness/config.hpp"
#include "cady/harness/report.hpp"
#include "cady/planning/mpc.hpp"
#include "cady/training/dataset.hpp"

namespace cady::harness {

inline constexpr const char* kCodeVersion = "cady 0.1.0";

/// CADY f^D with its edge distribution and the dense baseline (f^C).
struct TrainedModels {
  model::CadyModel cady;
  causal::EdgeProbMatrix edge_probs;
  model::CadyModel dense;
  training::TransitionDataset dataset;     // training rows; empty when loaded from checkpoints
  training::TransitionDataset validation;  // held-out rows (diff-drive)
  std::vector<double> reward_curve;     // MBRL only
};

/// Cartpole: one MBRL run. Diff-drive: system identification then the
/// sequential f^C, p^D, f^D procedure.
TrainedModels train_models(const ExperimentConfig& cfg, std::uint64_t seed);

/// Loads the configured checkpoints, or trains with cfg.train_seed.
TrainedModels obtain_models(const ExperimentConfig& cfg);

/// Writes cady.json, dense.json, edge_probs.csv, dataset.csv and (MBRL)
/// reward_curve.csv into dir.
void save_models(const TrainedModels& models, const ExperimentConfig& cfg, const std::filesystem::path& dir);

/// How an episode predicts: the true simulator, or a model with sampled
/// masks, or a model with one fixed mask.
struct Predictor {
  std::string name;
  const model::CadyModel* model = nullptr;  // null: oracle
  causal::EdgeProbMatrix edge_probs;
  std::optional<causal::CausalMask> fixed_mask;

  static Predictor oracle() { return {"oracle", nullptr, {}, std::nullopt}; }
  static Predictor cady(const TrainedModels& m);
  static Predictor dense(const TrainedModels& m);
};

std::unique_ptr<env::Environment> make_environment(const ExperimentConfig& cfg,
                                                   const std::optional<env::Mission>& mission = std::nullopt);

/// One MPC episode with the configured planner (CEM on cartpole, MPPI on
/// diff-drive). The episode RNG is seeded with `run_seed`.
planning::EpisodeResult run_episode(const ExperimentConfig& cfg, env::Environment& env, const Predictor& predictor,
                                    const env::FaultConfig& fault, const env::InterventionSchedule& intervention,
                                    std::uint64_t run_seed, const planning::EpisodeConfig& episode = {});

/// Reward, steps, and for diff-drive success plus time and distance of
/// successful runs.
std::map<std::string, double> episode_metrics(const ExperimentConfig& cfg, const planning::EpisodeResult& ep);

ExperimentReport run_freeze_suite(const ExperimentConfig& cfg, const TrainedModels& models);
ExperimentReport run_noise_suite(const ExperimentConfig& cfg, const TrainedModels& models);
ExperimentReport run_missions_suite(const ExperimentConfig& cfg, const TrainedModels& models);
ExperimentReport run_fixed_graph_ablation(const ExperimentConfig& cfg, const TrainedModels& models);
ExperimentReport run_intervention_suite(const ExperimentConfig& cfg, const TrainedModels& models);

/// Dispatches by name: freeze, noise, missions, ablation, interventions.
ExperimentReport run_suite(const std::string& name, const ExperimentConfig& cfg, const TrainedModels& models);

/// Closed square patrol long enough to outlast `steps` at full speed.
env::Mission patrol_mission(const ExperimentConfig& cfg, std::size_t steps);

}  // namespace cady::harness
