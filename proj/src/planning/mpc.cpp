#include "cady/planning/mpc.hpp"

#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace cady::planning {

EpisodeResult mpc_run(env::Environment& env, Planner& planner, RolloutEvaluator& evaluator,
                      const EpisodeConfig& cfg, const env::FaultConfig& fault,
                      const env::InterventionSchedule& intervention, Rng& rng) {
  fault.validate(env.state_dim());
  intervention.validate(env.action_dim());
  if (!cfg.keep_initial_state) env.reset(rng);
  planner.reset();

  const std::size_t episode_length = env.max_steps();
  const std::size_t cap = cfg.max_steps.value_or(episode_length);
  env::FaultMemory memory;
  EpisodeResult result;
  result.rows.reserve(cap);

  for (std::size_t t = 0; t < cap; ++t) {
    TrajectoryRow row;
    row.t = t;
    row.true_state = env.state();
    row.observed_state = env::apply_fault(row.true_state, fault, t, episode_length, memory, rng);
    evaluator.objective().observe(env);
    row.action = planner.act(evaluator, row.observed_state, rng);
    env::clamp_action(row.action, env.action_low(), env.action_high());
    row.applied_action = env::apply_intervention(row.action, intervention, t, env.action_low(), env.action_high());
    const env::StepOutcome out = env.step(row.applied_action);
    row.next_state = env.state();
    row.reward = out.reward;
    row.done = out.done;
    result.total_reward += out.reward;
    result.rows.push_back(std::move(row));
    if (out.done) break;
  }
  result.steps = result.rows.size();
  result.success = env.succeeded();
  result.time = env.elapsed_time();
  result.distance = env.distance_traveled();
  return result;
}

void write_trajectory_csv(std::ostream& os, const EpisodeResult& episode,
                          const std::vector<std::string>& state_names,
                          const std::vector<std::string>& action_names) {
  os << "t";
  for (const auto& s : state_names) os << ',' << s;
  for (const auto& s : state_names) os << ",obs_" << s;
  for (const auto& a : action_names) os << ',' << a;
  os << ",reward,done\n" << std::setprecision(17);
  for (const auto& r : episode.rows) {
    if (r.true_state.size() != state_names.size() || r.action.size() != action_names.size()) {
      throw std::invalid_argument("write_trajectory_csv: names do not match row dimensions");
    }
    os << r.t;
    for (double v : r.true_state) os << ',' << v;
    for (double v : r.observed_state) os << ',' << v;
    for (double v : r.action) os << ',' << v;
    os << ',' << r.reward << ',' << (r.done ? 1 : 0) << '\n';
  }
}

}  // namespace cady::planning
