#pragma once

// Batched one-step transition functions used by rollouts. States and actions
// are feature-major: (state_dim x batch) and (action_dim x batch).

#include <optional>
#include <span>
#include <vector>

#include "cady/causal/edge_probs.hpp"
#include "cady/common.hpp"
#include "cady/env/cartpole.hpp"
#include "cady/env/diffdrive.hpp"
#include "cady/model/model.hpp"

namespace cady::planning {

class BatchDynamics {
 public:
  virtual ~BatchDynamics() = default;
  virtual std::size_t state_dim() const = 0;
  virtual std::size_t action_dim() const = 0;
  virtual void step(std::span<const double> states, std::span<const double> actions,
                    std::size_t batch, std::span<double> next, Rng& rng) = 0;
};

enum class Propagation { SampleGaussian, MeanOnly };

/// A trained dynamics model. Each column of every call gets its own mask
/// drawn from the edge distribution, unless a fixed mask is set.
class LearnedDynamics final : public BatchDynamics {
 public:
  LearnedDynamics(const model::CadyModel& model, causal::EdgeProbMatrix edge_probs,
                  Propagation propagation = Propagation::SampleGaussian);

  /// Replaces sampling with one deterministic graph.
  void set_fixed_mask(causal::CausalMask mask);

  std::size_t state_dim() const override { return model_->spec().state_dim; }
  std::size_t action_dim() const override { return model_->spec().action_dim; }
  void step(std::span<const double> states, std::span<const double> actions, std::size_t batch,
            std::span<double> next, Rng& rng) override;

  /// Per-column model evaluations and sampled masks so far.
  std::size_t model_calls() const { return calls_; }
  std::size_t mask_draws() const { return draws_; }

 private:
  const model::CadyModel* model_;
  causal::EdgeProbMatrix edge_probs_;
  Propagation propagation_;
  std::optional<causal::CausalMask> fixed_;
  bool deterministic_graph_;
  std::size_t calls_ = 0;
  std::size_t draws_ = 0;
  std::vector<double> input_, mean_, logvar_;
  model::MaskBatch masks_;
};

/// The true cart-pole simulator.
class CartpoleOracle final : public BatchDynamics {
 public:
  explicit CartpoleOracle(env::CartpoleParams params = {}) : params_(params) {}
  std::size_t state_dim() const override { return 4; }
  std::size_t action_dim() const override { return 1; }
  void step(std::span<const double> states, std::span<const double> actions, std::size_t batch,
            std::span<double> next, Rng& rng) override;

 private:
  env::CartpoleParams params_;
};

/// The true diff-drive kinematics.
class DiffDriveOracle final : public BatchDynamics {
 public:
  explicit DiffDriveOracle(env::DiffDriveParams params = {}) : params_(params) {}
  std::size_t state_dim() const override { return 3; }
  std::size_t action_dim() const override { return 2; }
  void step(std::span<const double> states, std::span<const double> actions, std::size_t batch,
            std::span<double> next, Rng& rng) override;

 private:
  env::DiffDriveParams params_;
};

}  // namespace cady::planning
