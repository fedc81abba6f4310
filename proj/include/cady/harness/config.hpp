#pragma once

// Experiment configuration read from an INI file. Every section and key is
// optional; unknown sections or keys are rejected.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cady/causal/attribution.hpp"
#include "cady/env/diffdrive.hpp"
#include "cady/model/model.hpp"
#include "cady/planning/dynamics.hpp"
#include "cady/planning/planners.hpp"
#include "cady/training/trainer.hpp"

namespace cady::harness {

enum class EnvKind { Cartpole, DiffDrive };

std::string env_name(EnvKind kind);

struct GainPair {
  double v = 1.0;
  double omega = 1.0;
};

struct ExperimentConfig {
  // [experiment]
  EnvKind environment = EnvKind::Cartpole;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::uint64_t train_seed = 0;
  std::string output_dir;  // empty: use CADY_OUT_DIR or "out"

  // [model]
  model::ModelSpec spec;  // state/action dims and angle dims follow the environment

  // [train]
  training::TrainConfig train;
  std::size_t trials = 20;              // MBRL trials (cartpole)
  std::size_t sysid_transitions = 10000;  // diff-drive
  planning::Propagation propagation = planning::Propagation::SampleGaussian;

  // [attribution]
  causal::AttributionConfig attribution;
  double rho_min = 0.02;

  // [models] pre-trained checkpoints; both empty means train on demand.
  std::string cady_checkpoint;
  std::string dense_checkpoint;

  // [cem] and [mppi]
  planning::CemConfig cem;
  planning::MppiConfig mppi;

  // [mission]
  env::Mission mission;

  // [freeze]
  double freeze_onset = 0.1;

  // [noise]
  double noise_variance = 0.05;
  std::size_t noise_trials = 20;
  std::vector<double> noise_sweep{0.01, 0.05, 0.1, 0.2, 0.5, 1.0};

  // [ablation]
  std::size_t ablation_repetitions = 10;
  double ablation_threshold = 0.5;

  // [interventions]
  std::size_t intervention_onset = 250;
  std::size_t intervention_window = 250;
  std::vector<GainPair> intervention_schedules{{1.0, 1.0}, {1.0, 0.5}, {0.5, 1.0}, {0.5, 0.5}};
  std::size_t finetune_epochs = training::kFinetuneEpochs;
  double patrol_side = 3.0;

  /// Environment-dependent defaults: planner horizon, hidden size, MPPI
  /// iterations, mission.
  static ExperimentConfig defaults(EnvKind kind);

  void validate() const;
  /// Canonical INI text listing every key; parsing it yields an equal config.
  std::string to_ini() const;
  /// FNV-1a of to_ini().
  std::uint64_t hash() const;
  std::filesystem::path resolve_output_dir(const std::optional<std::string>& override_dir = std::nullopt) const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Seed of an independent run stream, mixed from (base, stream, index).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index);

}  // namespace cady::harness
