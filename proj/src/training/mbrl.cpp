#include "cady/training/mbrl.hpp"

#include <stdexcept>

namespace cady::training {

namespace {

// Stand-in for the random policy, which never queries the evaluator.
class NullDynamics final : public planning::BatchDynamics {
 public:
  NullDynamics(std::size_t state_dim, std::size_t action_dim) : n_(state_dim), p_(action_dim) {}
  std::size_t state_dim() const override { return n_; }
  std::size_t action_dim() const override { return p_; }
  void step(std::span<const double>, std::span<const double>, std::size_t, std::span<double>, Rng&) override {
    throw std::logic_error("random policy queried the dynamics");
  }

 private:
  std::size_t n_, p_;
};

}  // namespace

void append_episode(TransitionDataset& data, const std::vector<planning::TrajectoryRow>& rows, std::size_t trial) {
  for (const auto& r : rows) data.append(r.true_state, r.action, r.next_state, trial, r.t);
}

MbrlResult mbrl_loop(env::Environment& env, planning::Planner& planner, planning::Objective& objective,
                     const model::ModelSpec& spec, const MbrlConfig& cfg, Rng& rng) {
  if (cfg.trials < 1) throw std::invalid_argument("mbrl_loop: trials must be >= 1");
  if (spec.state_dim != env.state_dim() || spec.action_dim != env.action_dim()) {
    throw std::invalid_argument("mbrl_loop: model spec does not match the environment");
  }
  const std::size_t dim = spec.input_dim(), n = spec.state_dim;
  const planning::ActionBounds bounds{env.action_low(), env.action_high()};

  MbrlResult res;
  res.dataset = TransitionDataset(n, spec.action_dim, env.angle_dims());
  res.edge_probs = causal::EdgeProbMatrix::constant(dim, n, kInitialEdgeProbability);

  for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
    planning::EpisodeResult episode;
    if (trial == 0) {
      planning::RandomPlanner random(bounds);
      NullDynamics null_dynamics(n, spec.action_dim);
      planning::RolloutEvaluator evaluator(null_dynamics, objective);
      episode = planning::mpc_run(env, random, evaluator, {}, {}, {}, rng);
    } else {
      res.contribution = train_contribution_model(res.dataset, spec, cfg.train, rng);
      res.edge_probs = estimate_distribution(res.contribution, res.dataset, cfg.attribution, cfg.rho_min,
                                             causal::cube_root_smoothing, rng);
      res.dynamics = train_dynamics_model(res.dataset, spec, res.edge_probs, cfg.train, rng);
      planning::LearnedDynamics dynamics(res.dynamics, res.edge_probs, cfg.propagation);
      planning::RolloutEvaluator evaluator(dynamics, objective);
      episode = planning::mpc_run(env, planner, evaluator, {}, {}, {}, rng);
    }
    append_episode(res.dataset, episode.rows, trial);
    res.rewards.push_back(episode.total_reward);
    res.episode_lengths.push_back(episode.steps);
  }
  return res;
}

}  // namespace cady::training
