#pragma once

#include <span>
#include <vector>

#include "cady/planning/dynamics.hpp"
#include "cady/planning/objective.hpp"

namespace cady::planning {

/// Scores candidate action sequences by rolling them through a dynamics
/// model. Sequences are candidate-major: [candidate][step][action].
class RolloutEvaluator {
 public:
  RolloutEvaluator(BatchDynamics& dynamics, Objective& objective)
      : dynamics_(&dynamics), objective_(&objective) {}

  BatchDynamics& dynamics() { return *dynamics_; }
  Objective& objective() { return *objective_; }
  std::size_t state_dim() const { return dynamics_->state_dim(); }
  std::size_t action_dim() const { return dynamics_->action_dim(); }

  /// Non-finite predicted states give a score of -infinity.
  void evaluate(std::span<const double> initial_state, std::span<const double> sequences,
                std::size_t candidates, std::size_t horizon, std::span<double> scores, Rng& rng);

 private:
  BatchDynamics* dynamics_;
  Objective* objective_;
  std::vector<double> states_, next_, actions_;
  std::vector<std::uint8_t> alive_;
};

}  // namespace cady::planning
