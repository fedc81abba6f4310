#pragma once

#include <vector>

#include "cady/causal/attribution.hpp"
#include "cady/causal/edge_probs.hpp"
#include "cady/model/model.hpp"
#include "cady/training/dataset.hpp"

namespace cady::training {

struct TrainConfig {
  std::size_t batch_size = 8;
  std::size_t max_epochs = 64;
  double loss_delta_stop = 1e-3;
  double learning_rate = 3e-3;

  void validate() const;
};

inline constexpr double kInitialEdgeProbability = 0.5;
inline constexpr std::size_t kFinetuneEpochs = 16;

struct TrainReport {
  std::vector<double> epoch_losses;  // mean batch loss per epoch
  std::size_t batches = 0;
  std::size_t mask_draws = 0;
  bool early_stopped = false;
};

/// Minimizes batch-mean NLL on normalized deltas with the model's current
/// normalizer. One mask per batch is drawn from edge_probs; a fresh Adam
/// state is used. Stops at max_epochs or at the first epoch whose mean loss
/// differs from the previous one by less than loss_delta_stop.
TrainReport train_model(model::CadyModel& model, const causal::EdgeProbMatrix& edge_probs,
                        const TransitionDataset& data, const TrainConfig& cfg, Rng& rng);

/// Builds a model, fits its normalizer on `data` and trains it fully wired.
model::CadyModel train_contribution_model(const TransitionDataset& data, const model::ModelSpec& spec,
                                          const TrainConfig& cfg, Rng& rng, TrainReport* report = nullptr);

/// Same as train_contribution_model but masks are sampled from edge_probs.
model::CadyModel train_dynamics_model(const TransitionDataset& data, const model::ModelSpec& spec,
                                      const causal::EdgeProbMatrix& edge_probs, const TrainConfig& cfg,
                                      Rng& rng, TrainReport* report = nullptr);

/// Mean |IG| edge scores of the contribution model on `data`, normalized.
causal::EdgeProbMatrix estimate_distribution(const model::CadyModel& contribution,
                                             const TransitionDataset& data,
                                             const causal::AttributionConfig& cfg, double rho_min,
                                             const causal::Smoothing& smoothing, Rng& rng);

/// Continues training on a recent window with the normalizer frozen.
TrainReport finetune(model::CadyModel& model, const causal::EdgeProbMatrix& edge_probs,
                     const TransitionDataset& window, const TrainConfig& cfg, Rng& rng);

struct MseReport {
  std::vector<double> per_dim;  // one fresh mask per row
  double aggregate = 0.0;
  std::vector<double> expected_per_dim;  // averaged over several mask draws per row
  double expected_aggregate = 0.0;
};

/// One-step raw-unit MSE of s_t + denorm(mu) against s_{t+1}; angle errors
/// are wrapped. Aggregate is the mean over dimensions.
MseReport one_step_mse(const model::CadyModel& model, const causal::EdgeProbMatrix& edge_probs,
                       const TransitionDataset& data, Rng& rng, std::size_t expectation_draws = 16);

}  // namespace cady::training
