#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "cady/env/environment.hpp"
#include "cady/env/faults.hpp"
#include "cady/planning/evaluator.hpp"
#include "cady/planning/planners.hpp"

namespace cady::planning {

struct TrajectoryRow {
  std::size_t t = 0;
  std::vector<double> true_state;      // before the step
  std::vector<double> observed_state;  // what the planner saw
  std::vector<double> action;          // commanded by the planner
  std::vector<double> applied_action;  // after the intervention, inside the simulator
  std::vector<double> next_state;      // true state after the step
  double reward = 0.0;
  bool done = false;
};

struct EpisodeResult {
  std::vector<TrajectoryRow> rows;
  double total_reward = 0.0;
  std::size_t steps = 0;
  bool success = false;
  double time = 0.0;
  double distance = 0.0;
};

struct EpisodeConfig {
  /// Step cap; nullopt uses the environment's own episode length.
  std::optional<std::size_t> max_steps;
  /// Skip env.reset() so the caller can place the initial state.
  bool keep_initial_state = false;
};

/// Observe (with faults), plan, execute (with interventions), log; stops
/// on done or the step cap.
EpisodeResult mpc_run(env::Environment& env, Planner& planner, RolloutEvaluator& evaluator,
                      const EpisodeConfig& cfg, const env::FaultConfig& fault,
                      const env::InterventionSchedule& intervention, Rng& rng);

/// Header: t, <state>, obs_<state>, <action>, reward, done.
void write_trajectory_csv(std::ostream& os, const EpisodeResult& episode,
                          const std::vector<std::string>& state_names,
                          const std::vector<std::string>& action_names);

}  // namespace cady::planning
