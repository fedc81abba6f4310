#pragma once

#include <span>
#include <vector>

#include "cady/common.hpp"
#include "cady/planning/evaluator.hpp"

namespace cady::planning {

/// Chooses the next action from an observed state.
class Planner {
 public:
  virtual ~Planner() = default;
  /// Clears warm-start state at the start of an episode.
  virtual void reset() = 0;
  virtual std::vector<double> act(RolloutEvaluator& evaluator, std::span<const double> observation,
                                  Rng& rng) = 0;
};

struct ActionBounds {
  std::vector<double> low;
  std::vector<double> high;

  std::size_t dim() const { return low.size(); }
  void validate() const;
};

/// Uniform random actions within bounds; ignores the evaluator.
class RandomPlanner final : public Planner {
 public:
  explicit RandomPlanner(ActionBounds bounds);
  void reset() override {}
  std::vector<double> act(RolloutEvaluator&, std::span<const double>, Rng& rng) override;

 private:
  ActionBounds bounds_;
};

struct CemConfig {
  std::size_t horizon = 15;
  std::size_t population = 200;
  double elite_ratio = 0.1;
  double alpha = 0.1;
  std::size_t iterations = 5;
  std::size_t replan_frequency = 1;

  std::size_t elite_count() const;
  void validate() const;
};

/// Cross-entropy method over action sequences. Samples come from a Gaussian
/// truncated at two standard deviations whose variance is capped so the
/// truncation region stays inside the bounds.
/// alpha * previous + (1 - alpha) * elite statistic.
inline double cem_blend(double previous, double elite, double alpha) {
  return alpha * previous + (1.0 - alpha) * elite;
}

class CemPlanner final : public Planner {
 public:
  CemPlanner(CemConfig cfg, ActionBounds bounds);

  void reset() override;
  std::vector<double> act(RolloutEvaluator& evaluator, std::span<const double> observation, Rng& rng) override;

  /// Runs the optimizer and returns the final mean sequence (horizon x dim).
  std::vector<double> plan(RolloutEvaluator& evaluator, std::span<const double> state, Rng& rng);

  /// Best elite score of each iteration of the last plan() call.
  const std::vector<double>& best_scores() const { return best_scores_; }
  const CemConfig& config() const { return cfg_; }

 private:
  CemConfig cfg_;
  ActionBounds bounds_;
  std::vector<double> mean_;      // warm-started across calls
  std::vector<double> plan_;      // sequence being executed between replans
  std::size_t plan_cursor_ = 0;
  std::vector<double> best_scores_;
};

struct MppiConfig {
  std::size_t horizon = 20;
  std::size_t num_samples = 256;
  double gamma = 0.9;
  double sigma = 0.01;  // noise variance
  double beta = 0.6;
  std::size_t iterations = 1;

  void validate() const;
};

/// Normalized weights exp(gamma (s_k - max s)). Throws when no score is finite.
std::vector<double> mppi_weights(std::span<const double> scores, double gamma);

/// n_t = beta eps_t + (1 - beta) n_{t-1}, n_{-1} = 0, applied per action dimension
/// on a [step][action] buffer.
void filter_noise(std::span<double> noise, std::size_t horizon, std::size_t dim, double beta);

/// Model predictive path integral control with time-correlated noise.
class MppiPlanner final : public Planner {
 public:
  MppiPlanner(MppiConfig cfg, ActionBounds bounds);

  void reset() override;
  std::vector<double> act(RolloutEvaluator& evaluator, std::span<const double> observation, Rng& rng) override;

  const std::vector<double>& nominal() const { return nominal_; }
  /// Weights from the last iteration of the last act() call.
  const std::vector<double>& last_weights() const { return weights_; }
  const MppiConfig& config() const { return cfg_; }

 private:
  MppiConfig cfg_;
  ActionBounds bounds_;
  std::vector<double> nominal_;
  std::vector<double> weights_;
};

}  // namespace cady::planning
