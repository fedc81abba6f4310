#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "cady/env/cartpole.hpp"
#include "cady/env/diffdrive.hpp"
#include "cady/planning/mpc.hpp"
#include "doctest.h"

using namespace cady;
using namespace cady::planning;

namespace {

// next state = action (1-D); NaN when the action exceeds `nan_above`.
class EchoDynamics final : public BatchDynamics {
 public:
  double nan_above = std::numeric_limits<double>::infinity();
  std::size_t state_dim() const override { return 1; }
  std::size_t action_dim() const override { return 1; }
  void step(std::span<const double>, std::span<const double> actions, std::size_t batch, std::span<double> next,
            Rng&) override {
    for (std::size_t k = 0; k < batch; ++k) next[k] = actions[k] > nan_above ? std::nan("") : actions[k];
  }
};

// Score -(s - target)^2 per step.
class QuadraticObjective final : public Objective {
 public:
  explicit QuadraticObjective(double target) : target_(target) {}
  void accumulate(std::span<const double> next, std::size_t batch, std::size_t, std::span<double> scores,
                  std::vector<std::uint8_t>& alive) const override {
    for (std::size_t k = 0; k < batch; ++k) {
      if (alive[k]) scores[k] -= (next[k] - target_) * (next[k] - target_);
    }
  }

 private:
  double target_;
};

const ActionBounds kUnit{{-1.0}, {1.0}};

}  // namespace

TEST_CASE("CEM finds the optimum of a quadratic") {
  EchoDynamics dyn;
  QuadraticObjective obj(0.3);
  RolloutEvaluator eval(dyn, obj);
  CemConfig cfg;
  cfg.horizon = 1;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    CemPlanner cem(cfg, kUnit);
    Rng rng(seed);
    const std::vector<double> s0{0.0};
    const auto seq = cem.plan(eval, s0, rng);
    REQUIRE(seq.size() == 1);
    CHECK(std::abs(seq[0] - 0.3) < 0.05);
    // Deterministic objective: best score per iteration never drops.
    const auto& best = cem.best_scores();
    REQUIRE(best.size() == 5);
    for (std::size_t i = 1; i < best.size(); ++i) CHECK(best[i] >= best[i - 1]);
  }
}

TEST_CASE("CEM config arithmetic") {
  CemConfig cfg;
  CHECK(cfg.elite_count() == 20);
  cfg.population = 15;
  CHECK(cfg.elite_count() == 2);
  cfg.population = 10;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK(cem_blend(0.0, 1.0, 0.1) == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(cem_blend(2.0, 2.0, 0.1) == doctest::Approx(2.0).epsilon(1e-15));
  CemConfig bad;
  bad.elite_ratio = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("CEM with degenerate bounds returns the forced sequence") {
  EchoDynamics dyn;
  QuadraticObjective obj(0.0);
  RolloutEvaluator eval(dyn, obj);
  CemConfig cfg;
  cfg.horizon = 4;
  CemPlanner cem(cfg, {{0.7}, {0.7}});
  Rng rng(1);
  const std::vector<double> s0{0.0};
  for (double a : cem.plan(eval, s0, rng)) CHECK(a == 0.7);
}

TEST_CASE("MPPI weights") {
  Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> scores(30);
    for (double& s : scores) s = 100.0 * standard_normal(rng);
    const auto w = mppi_weights(scores, 0.9);
    double total = 0.0;
    for (double v : w) {
      CHECK(v >= 0.0);
      total += v;
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
  const double inf = std::numeric_limits<double>::infinity();
  const auto w = mppi_weights(std::vector<double>{0.0, -inf}, 0.9);
  CHECK(w[0] == 1.0);
  CHECK(w[1] == 0.0);
  const auto eq = mppi_weights(std::vector<double>{-3.0, -3.0}, 0.9);
  CHECK(eq[0] == 0.5);
  CHECK_THROWS_AS(mppi_weights(std::vector<double>{-inf, std::nan("")}, 0.9), std::runtime_error);
}

TEST_CASE("MPPI noise filter") {
  std::vector<double> e{1.0, 1.0};
  filter_noise(e, 2, 1, 0.6);
  CHECK(e[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(e[1] == doctest::Approx(0.84).epsilon(1e-15));

  // Two action channels filter independently.
  std::vector<double> two{1.0, 0.0, 1.0, 0.0};
  filter_noise(two, 2, 2, 0.6);
  CHECK(two[1] == 0.0);
  CHECK(two[3] == 0.0);
  CHECK(two[2] == doctest::Approx(0.84));
}

TEST_CASE("MPPI with vanishing noise keeps the nominal") {
  EchoDynamics dyn;
  QuadraticObjective obj(0.5);
  RolloutEvaluator eval(dyn, obj);
  MppiConfig cfg;
  cfg.horizon = 5;
  cfg.num_samples = 16;
  cfg.sigma = 1e-300;
  MppiPlanner mppi(cfg, kUnit);
  Rng rng(4);
  const std::vector<double> s0{0.0};
  const auto a = mppi.act(eval, s0, rng);
  CHECK(std::abs(a[0]) < 1e-12);
  for (double v : mppi.nominal()) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("MPPI drops candidates whose rollout diverges") {
  EchoDynamics dyn;
  dyn.nan_above = 0.0;
  QuadraticObjective obj(1.0);
  RolloutEvaluator eval(dyn, obj);
  MppiConfig cfg;
  cfg.horizon = 1;
  cfg.num_samples = 64;
  cfg.sigma = 0.25;
  MppiPlanner mppi(cfg, kUnit);
  Rng rng(5);
  const std::vector<double> s0{0.0};
  // Every positive candidate is -inf; the update averages non-positive ones only.
  const auto a = mppi.act(eval, s0, rng);
  CHECK(a[0] <= 0.0);
  std::size_t zeros = 0;
  for (double w : mppi.last_weights()) zeros += w == 0.0;
  CHECK(zeros > 0);

  dyn.nan_above = -2.0;
  CHECK_THROWS_AS(mppi.act(eval, s0, rng), std::runtime_error);
}

TEST_CASE("planners keep actions inside bounds") {
  env::DiffDriveParams params;
  DiffDriveOracle dyn(params);
  env::Mission mission;
  mission.waypoints = {{30.0, -20.0}};
  MissionObjective obj(mission);
  RolloutEvaluator eval(dyn, obj);
  const ActionBounds bounds{{params.v_min, params.omega_min}, {params.v_max, params.omega_max}};

  MppiConfig mcfg;
  mcfg.num_samples = 32;
  mcfg.sigma = 25.0;
  MppiPlanner mppi(mcfg, bounds);
  CemConfig ccfg;
  ccfg.population = 40;
  ccfg.iterations = 2;
  CemPlanner cem(ccfg, bounds);
  Rng rng(6);
  for (int t = 0; t < 20; ++t) {
    const std::vector<double> s{standard_normal(rng), standard_normal(rng), standard_normal(rng)};
    for (Planner* planner : {static_cast<Planner*>(&mppi), static_cast<Planner*>(&cem)}) {
      const auto a = planner->act(eval, s, rng);
      for (std::size_t i = 0; i < 2; ++i) {
        CHECK(a[i] >= bounds.low[i]);
        CHECK(a[i] <= bounds.high[i]);
      }
    }
  }
  for (std::size_t i = 0; i < mppi.nominal().size(); ++i) {
    CHECK(mppi.nominal()[i] >= bounds.low[i % 2]);
    CHECK(mppi.nominal()[i] <= bounds.high[i % 2]);
  }
}

TEST_CASE("learned dynamics draws one mask per model call") {
  Rng rng(8);
  model::ModelSpec spec;
  spec.state_dim = 4;
  spec.action_dim = 1;
  auto m = model::CadyModel::build(spec, rng);
  m.normalizer() = model::Normalizer{std::vector<double>(5, 0.0), std::vector<double>(5, 1.0),
                                     std::vector<double>(4, 0.0), std::vector<double>(4, 0.01)};
  LearnedDynamics dyn(m, causal::EdgeProbMatrix::constant(5, 4, 0.5));
  CartpoleObjective obj;
  RolloutEvaluator eval(dyn, obj);
  constexpr std::size_t kCandidates = 7, kHorizon = 6;
  std::vector<double> seq(kCandidates * kHorizon, 0.1), scores(kCandidates);
  const std::vector<double> s0(4, 0.0);
  eval.evaluate(s0, seq, kCandidates, kHorizon, scores, rng);
  CHECK(dyn.model_calls() == kCandidates * kHorizon);
  CHECK(dyn.mask_draws() == dyn.model_calls());

  // A fixed mask replaces sampling entirely.
  LearnedDynamics fixed(m, causal::EdgeProbMatrix::constant(5, 4, 0.5));
  fixed.set_fixed_mask(causal::CausalMask::ones(5, 4));
  RolloutEvaluator eval_fixed(fixed, obj);
  eval_fixed.evaluate(s0, seq, kCandidates, kHorizon, scores, rng);
  CHECK(fixed.mask_draws() == 0);

  // The all-ones distribution is deterministic.
  LearnedDynamics dense(m, causal::EdgeProbMatrix::ones(5, 4));
  RolloutEvaluator eval_dense(dense, obj);
  eval_dense.evaluate(s0, seq, kCandidates, kHorizon, scores, rng);
  CHECK(dense.mask_draws() == 0);
  CHECK(dense.model_calls() == kCandidates * kHorizon);
}

TEST_CASE("mpc_run determinism and zero-length episodes") {
  env::CartpoleEnv env;
  CartpoleOracle dyn;
  CartpoleObjective obj;
  RolloutEvaluator eval(dyn, obj);
  CemConfig cfg;
  cfg.population = 30;
  cfg.iterations = 2;
  CemPlanner cem(cfg, {env.action_low(), env.action_high()});

  EpisodeConfig none;
  none.max_steps = 0;
  Rng rng(1);
  const auto empty = mpc_run(env, cem, eval, none, {}, {}, rng);
  CHECK(empty.rows.empty());
  CHECK(empty.total_reward == 0.0);
  CHECK(empty.steps == 0);

  EpisodeConfig short_run;
  short_run.max_steps = 40;
  auto run = [&](const env::FaultConfig& fault) {
    Rng r(77);
    return mpc_run(env, cem, eval, short_run, fault, {}, r);
  };
  const auto a = run(env::FaultConfig::gaussian_noise(0.05));
  const auto b = run(env::FaultConfig::gaussian_noise(0.05));
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t t = 0; t < a.rows.size(); ++t) {
    CHECK(a.rows[t].true_state == b.rows[t].true_state);
    CHECK(a.rows[t].observed_state == b.rows[t].observed_state);
    CHECK(a.rows[t].action == b.rows[t].action);
  }
  CHECK(a.total_reward == b.total_reward);
}

TEST_CASE("oracle CEM balances the pole") {
  env::CartpoleEnv env;
  CartpoleOracle dyn;
  CartpoleObjective obj;
  RolloutEvaluator eval(dyn, obj);
  CemPlanner cem({}, {env.action_low(), env.action_high()});
  Rng rng(0);
  const auto ep = mpc_run(env, cem, eval, {}, {}, {}, rng);
  CHECK(ep.total_reward >= 190.0);
}

TEST_CASE("trajectory CSV") {
  EpisodeResult ep;
  TrajectoryRow row;
  row.t = 0;
  row.true_state = {1.0, 2.0};
  row.observed_state = {1.5, 2.0};
  row.action = {0.25};
  row.reward = -1.0;
  row.done = true;
  ep.rows.push_back(row);
  std::ostringstream os;
  write_trajectory_csv(os, ep, {"x", "y"}, {"v"});
  CHECK(os.str() == "t,x,y,obs_x,obs_y,v,reward,done\n0,1,2,1.5,2,0.25,-1,1\n");
}
