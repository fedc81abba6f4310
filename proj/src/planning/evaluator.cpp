#include "cady/planning/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cady::planning {

void RolloutEvaluator::evaluate(std::span<const double> initial_state, std::span<const double> sequences,
                                std::size_t candidates, std::size_t horizon, std::span<double> scores,
                                Rng& rng) {
  const std::size_t n = state_dim(), p = action_dim();
  if (initial_state.size() != n) throw std::invalid_argument("RolloutEvaluator: initial state length mismatch");
  if (sequences.size() != candidates * horizon * p || scores.size() != candidates) {
    throw std::invalid_argument("RolloutEvaluator: sequence buffer does not match candidates x horizon");
  }
  states_.resize(n * candidates);
  next_.resize(n * candidates);
  actions_.resize(p * candidates);
  for (std::size_t j = 0; j < n; ++j) std::fill_n(states_.begin() + j * candidates, candidates, initial_state[j]);
  std::fill(scores.begin(), scores.end(), 0.0);
  alive_.assign(candidates, 1);

  for (std::size_t t = 0; t < horizon; ++t) {
    for (std::size_t k = 0; k < candidates; ++k)
      for (std::size_t a = 0; a < p; ++a) actions_[a * candidates + k] = sequences[(k * horizon + t) * p + a];
    dynamics_->step(states_, actions_, candidates, next_, rng);
    for (std::size_t k = 0; k < candidates; ++k) {
      if (!alive_[k]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (!std::isfinite(next_[j * candidates + k])) {
          alive_[k] = 0;
          scores[k] = -std::numeric_limits<double>::infinity();
          break;
        }
      }
    }
    objective_->accumulate(next_, candidates, t, scores, alive_);
    std::swap(states_, next_);
  }
}

}  // namespace cady::planning
