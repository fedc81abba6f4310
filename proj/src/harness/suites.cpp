#include "cady/harness/suites.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "cady/env/cartpole.hpp"
#include "cady/env/diffdrive.hpp"
#include "cady/model/checkpoint.hpp"
#include "cady/planning/objective.hpp"
#include "cady/training/mbrl.hpp"
#include "cady/training/sysid.hpp"

namespace cady::harness {

namespace {

// Stream ids keep the RNG of each purpose independent.
constexpr std::uint64_t kTrainStream = 1;
constexpr std::uint64_t kEpisodeStream = 2;
constexpr std::uint64_t kTrajectoryStream = 3;
constexpr std::uint64_t kEvalStream = 4;
constexpr std::uint64_t kFinetuneStream = 5;
constexpr std::uint64_t kSplitStream = 6;

constexpr double kHeldOutFraction = 0.9;

planning::ActionBounds bounds_of(const env::Environment& e) { return {e.action_low(), e.action_high()}; }

std::string fmt_label(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

void require_cartpole(const ExperimentConfig& cfg, const char* suite) {
  if (cfg.environment != EnvKind::Cartpole) {
    throw std::invalid_argument(std::string(suite) + " suite runs on cartpole only");
  }
}

void require_diffdrive(const ExperimentConfig& cfg, const char* suite) {
  if (cfg.environment != EnvKind::DiffDrive) {
    throw std::invalid_argument(std::string(suite) + " suite runs on diffdrive only");
  }
}

ExperimentReport new_report(const std::string& suite, const ExperimentConfig& cfg) {
  return {suite, {}, cfg.to_ini(), cfg.hash(), kCodeVersion};
}

model::ModelSpec full_spec(const ExperimentConfig& cfg) {
  model::ModelSpec s = cfg.spec;
  if (cfg.environment == EnvKind::DiffDrive) s.angle_dims = {2};
  return s;
}

}  // namespace

Predictor Predictor::cady(const TrainedModels& m) { return {"cady", &m.cady, m.edge_probs, std::nullopt}; }

Predictor Predictor::dense(const TrainedModels& m) {
  const auto& s = m.dense.spec();
  return {"dense", &m.dense, causal::EdgeProbMatrix::ones(s.input_dim(), s.state_dim), std::nullopt};
}

std::unique_ptr<env::Environment> make_environment(const ExperimentConfig& cfg,
                                                   const std::optional<env::Mission>& mission) {
  if (cfg.environment == EnvKind::Cartpole) return std::make_unique<env::CartpoleEnv>();
  return std::make_unique<env::DiffDriveEnv>(mission.value_or(cfg.mission));
}

TrainedModels train_models(const ExperimentConfig& cfg, std::uint64_t seed) {
  Rng rng(derive_seed(seed, kTrainStream, 0));
  const model::ModelSpec spec = full_spec(cfg);
  TrainedModels out;
  if (cfg.environment == EnvKind::Cartpole) {
    env::CartpoleEnv env;
    planning::CemPlanner cem(cfg.cem, bounds_of(env));
    planning::CartpoleObjective objective;
    training::MbrlConfig mcfg{cfg.trials, cfg.train, cfg.attribution, cfg.rho_min, cfg.propagation};
    auto res = training::mbrl_loop(env, cem, objective, spec, mcfg, rng);
    if (cfg.trials < 2) throw std::invalid_argument("train_models: MBRL needs at least 2 trials to fit a model");
    out.cady = std::move(res.dynamics);
    out.edge_probs = std::move(res.edge_probs);
    out.dense = std::move(res.contribution);
    out.dataset = std::move(res.dataset);
    out.reward_curve = std::move(res.rewards);
    return out;
  }
  training::SysidConfig scfg;
  scfg.transitions = cfg.sysid_transitions;
  const auto data = training::generate_sysid_dataset({}, scfg, rng);
  Rng split_rng(derive_seed(seed, kSplitStream, 0));
  auto split = training::split_dataset(data, kHeldOutFraction, split_rng);
  out.dense = training::train_contribution_model(split.train, spec, cfg.train, rng);
  out.edge_probs = training::estimate_distribution(out.dense, split.train, cfg.attribution, cfg.rho_min,
                                                   causal::cube_root_smoothing, rng);
  out.cady = training::train_dynamics_model(split.train, spec, out.edge_probs, cfg.train, rng);
  out.dataset = std::move(split.train);
  out.validation = std::move(split.validation);
  return out;
}

TrainedModels obtain_models(const ExperimentConfig& cfg) {
  if (cfg.cady_checkpoint.empty()) return train_models(cfg, cfg.train_seed);
  for (const auto& p : {cfg.cady_checkpoint, cfg.dense_checkpoint}) {
    if (!std::filesystem::exists(p)) throw std::runtime_error("missing checkpoint '" + p + "'");
  }
  TrainedModels out;
  auto cady = model::load_checkpoint(cfg.cady_checkpoint);
  if (!cady.edge_probs) {
    throw std::runtime_error("checkpoint '" + cfg.cady_checkpoint + "' has no edge probabilities");
  }
  out.cady = std::move(cady.model);
  out.edge_probs = std::move(*cady.edge_probs);
  out.dense = model::load_checkpoint(cfg.dense_checkpoint).model;
  const model::ModelSpec spec = full_spec(cfg);
  for (const auto* m : {&out.cady, &out.dense}) {
    if (m->spec().state_dim != spec.state_dim || m->spec().action_dim != spec.action_dim) {
      throw std::runtime_error("checkpoint dimensions do not match environment " + env_name(cfg.environment));
    }
  }
  return out;
}

void save_models(const TrainedModels& models, const ExperimentConfig& cfg, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  model::save_checkpoint(dir / "cady.json", models.cady, &models.edge_probs);
  model::save_checkpoint(dir / "dense.json", models.dense);
  const auto env = make_environment(cfg);
  std::vector<std::string> parents = env->state_names();
  for (const auto& a : env->action_names()) parents.push_back(a);
  std::vector<std::string> children;
  for (const auto& s : env->state_names()) children.push_back("d_" + s);
  std::ofstream heat(dir / "edge_probs.csv");
  causal::write_edge_csv(heat, models.edge_probs, parents, children);
  if (!models.dataset.empty()) {
    std::ofstream ds(dir / "dataset.csv");
    models.dataset.write_csv(ds);
  }
  if (!models.reward_curve.empty()) {
    std::ofstream curve(dir / "reward_curve.csv");
    write_reward_curve_csv(curve, cfg.train_seed, models.reward_curve);
  }
  if (!heat) throw std::runtime_error("failed writing models to '" + dir.string() + "'");
}

planning::EpisodeResult run_episode(const ExperimentConfig& cfg, env::Environment& env, const Predictor& predictor,
                                    const env::FaultConfig& fault, const env::InterventionSchedule& intervention,
                                    std::uint64_t run_seed, const planning::EpisodeConfig& episode) {
  std::unique_ptr<planning::BatchDynamics> dynamics;
  if (predictor.model) {
    auto learned = std::make_unique<planning::LearnedDynamics>(*predictor.model, predictor.edge_probs, cfg.propagation);
    if (predictor.fixed_mask) learned->set_fixed_mask(*predictor.fixed_mask);
    dynamics = std::move(learned);
  } else if (cfg.environment == EnvKind::Cartpole) {
    dynamics = std::make_unique<planning::CartpoleOracle>();
  } else {
    dynamics = std::make_unique<planning::DiffDriveOracle>();
  }

  std::unique_ptr<planning::Objective> objective;
  std::unique_ptr<planning::Planner> planner;
  if (cfg.environment == EnvKind::Cartpole) {
    objective = std::make_unique<planning::CartpoleObjective>();
    planner = std::make_unique<planning::CemPlanner>(cfg.cem, bounds_of(env));
  } else {
    const auto* dd = dynamic_cast<const env::DiffDriveEnv*>(&env);
    if (!dd) throw std::invalid_argument("run_episode: diffdrive config with a non-diffdrive environment");
    objective = std::make_unique<planning::MissionObjective>(dd->mission());
    planner = std::make_unique<planning::MppiPlanner>(cfg.mppi, bounds_of(env));
  }
  planning::RolloutEvaluator evaluator(*dynamics, *objective);
  Rng rng(run_seed);
  return planning::mpc_run(env, *planner, evaluator, episode, fault, intervention, rng);
}

std::map<std::string, double> episode_metrics(const ExperimentConfig& cfg, const planning::EpisodeResult& ep) {
  std::map<std::string, double> m{{"reward", ep.total_reward}, {"steps", static_cast<double>(ep.steps)}};
  if (cfg.environment == EnvKind::DiffDrive) {
    m["success"] = ep.success ? 1.0 : 0.0;
    // Time and distance count for successful runs only.
    if (ep.success) {
      m["time"] = ep.time;
      m["distance"] = ep.distance;
    }
  }
  return m;
}

namespace {

// Nominal and faulted runs per predictor with PD against the same seed's
// nominal reward.
void degradation_runs(const ExperimentConfig& cfg, const TrainedModels& models,
                      const std::vector<std::uint64_t>& seeds,
                      const std::vector<std::pair<std::string, env::FaultConfig>>& faults, ExperimentReport& report) {
  const auto env = make_environment(cfg);
  for (const Predictor& p : {Predictor::cady(models), Predictor::dense(models)}) {
    for (const std::uint64_t seed : seeds) {
      const std::uint64_t run_seed = derive_seed(cfg.train_seed, kEpisodeStream, seed);
      const auto nominal = run_episode(cfg, *env, p, env::FaultConfig::none(), {}, run_seed);
      auto metrics = episode_metrics(cfg, nominal);
      metrics["pd"] = 0.0;
      metrics["degradation"] = 0.0;
      report.records.push_back({seed, "nominal", p.name, metrics});
      for (const auto& [label, fault] : faults) {
        const auto ep = run_episode(cfg, *env, p, fault, {}, run_seed);
        auto m = episode_metrics(cfg, ep);
        const auto d = degradation(ep.total_reward, nominal.total_reward);
        m["pd"] = d.pd;
        m["degradation"] = -d.pd;
        report.records.push_back({seed, label, p.name, m});
      }
    }
  }
}

}  // namespace

ExperimentReport run_freeze_suite(const ExperimentConfig& cfg, const TrainedModels& models) {
  require_cartpole(cfg, "freeze");
  ExperimentReport report = new_report("freeze", cfg);
  const auto names = make_environment(cfg)->state_names();
  std::vector<std::pair<std::string, env::FaultConfig>> faults;
  for (std::size_t i = 0; i < names.size(); ++i) {
    faults.emplace_back("freeze_" + names[i], env::FaultConfig::freeze(i, cfg.freeze_onset));
  }
  degradation_runs(cfg, models, cfg.seeds, faults, report);
  return report;
}

ExperimentReport run_noise_suite(const ExperimentConfig& cfg, const TrainedModels& models) {
  ExperimentReport report = new_report("noise", cfg);
  if (cfg.environment == EnvKind::Cartpole) {
    std::vector<std::uint64_t> trials(cfg.noise_trials);
    std::iota(trials.begin(), trials.end(), 0);
    degradation_runs(cfg, models, trials,
                     {{"noise_" + fmt_label(cfg.noise_variance), env::FaultConfig::gaussian_noise(cfg.noise_variance)}},
                     report);
    return report;
  }
  std::vector<double> sweep{0.0};
  sweep.insert(sweep.end(), cfg.noise_sweep.begin(), cfg.noise_sweep.end());
  for (const Predictor& p : {Predictor::cady(models), Predictor::dense(models)}) {
    for (const double variance : sweep) {
      const auto fault = variance == 0.0 ? env::FaultConfig::none() : env::FaultConfig::gaussian_noise(variance);
      for (const std::uint64_t seed : cfg.seeds) {
        const auto env = make_environment(cfg);
        const auto ep = run_episode(cfg, *env, p, fault, {}, derive_seed(cfg.train_seed, kEpisodeStream, seed));
        report.records.push_back({seed, "noise_" + fmt_label(variance), p.name, episode_metrics(cfg, ep)});
      }
    }
  }
  return report;
}

ExperimentReport run_missions_suite(const ExperimentConfig& cfg, const TrainedModels& models) {
  require_diffdrive(cfg, "missions");
  ExperimentReport report = new_report("missions", cfg);
  for (const Predictor& p : {Predictor::oracle(), Predictor::cady(models), Predictor::dense(models)}) {
    for (const std::uint64_t seed : cfg.seeds) {
      const auto env = make_environment(cfg);
      const auto ep = run_episode(cfg, *env, p, {}, {}, derive_seed(cfg.train_seed, kEpisodeStream, seed));
      report.records.push_back({seed, "mission", p.name, episode_metrics(cfg, ep)});
    }
  }
  return report;
}

ExperimentReport run_fixed_graph_ablation(const ExperimentConfig& cfg, const TrainedModels& models) {
  ExperimentReport report = new_report("ablation", cfg);
  Predictor sampling = Predictor::cady(models);
  sampling.name = "sampling";
  Predictor fixed = Predictor::cady(models);
  fixed.name = "fixed";
  fixed.fixed_mask = causal::threshold_mask(models.edge_probs, cfg.ablation_threshold);
  for (std::uint64_t rep = 0; rep < cfg.ablation_repetitions; ++rep) {
    const std::uint64_t run_seed = derive_seed(cfg.train_seed, kEpisodeStream, rep);
    const auto env = make_environment(cfg);
    const auto a = run_episode(cfg, *env, sampling, {}, {}, run_seed);
    const auto b = run_episode(cfg, *env, fixed, {}, {}, run_seed);
    report.records.push_back({rep, "ablation", sampling.name, episode_metrics(cfg, a)});
    report.records.push_back({rep, "ablation", fixed.name, episode_metrics(cfg, b)});
    report.records.push_back({rep, "ablation", "paired", {{"reward_difference", a.total_reward - b.total_reward}}});
  }
  return report;
}

env::Mission patrol_mission(const ExperimentConfig& cfg, std::size_t steps) {
  const env::DiffDriveParams params;
  const double s = cfg.patrol_side;
  const double reach = static_cast<double>(steps) * params.dt * params.v_max;
  const auto laps = static_cast<std::size_t>(std::ceil(reach / (4.0 * s))) + 1;
  env::Mission m;
  for (std::size_t l = 0; l < laps; ++l) m.waypoints.insert(m.waypoints.end(), {{s, 0.0}, {s, s}, {0.0, s}, {0.0, 0.0}});
  m.arrival_radius = cfg.mission.arrival_radius;
  m.time_limit = static_cast<double>(steps) * params.dt;
  return m;
}

ExperimentReport run_intervention_suite(const ExperimentConfig& cfg, const TrainedModels& models) {
  require_diffdrive(cfg, "interventions");
  ExperimentReport report = new_report("interventions", cfg);
  const std::size_t onset = cfg.intervention_onset, window = cfg.intervention_window;
  const std::size_t steps = onset + 2 * window;
  training::TrainConfig ft = cfg.train;
  ft.max_epochs = cfg.finetune_epochs;

  for (const auto& g : cfg.intervention_schedules) {
    const env::InterventionSchedule schedule{onset, {g.v, g.omega}};
    const std::string label = "gain_v" + fmt_label(g.v) + "_w" + fmt_label(g.omega);
    for (const std::uint64_t seed : cfg.seeds) {
      Rng start_rng(derive_seed(cfg.train_seed, kTrajectoryStream, seed));
      env::Mission mission = patrol_mission(cfg, steps);
      mission.start[2] = std::numbers::pi * (2.0 * uniform01(start_rng) - 1.0);
      const auto env = make_environment(cfg, mission);
      planning::EpisodeConfig ec;
      ec.max_steps = steps;
      const auto ep = run_episode(cfg, *env, Predictor::oracle(), {}, schedule, start_rng(), ec);
      if (ep.steps != steps) {
        throw std::runtime_error("interventions: trajectory ended after " + std::to_string(ep.steps) + " of " +
                                 std::to_string(steps) + " steps");
      }
      training::TransitionDataset data(3, 2, {2});
      training::append_episode(data, ep.rows, 0);
      const auto pre = data.rows_in_steps(0, onset);
      const auto post = data.rows_in_steps(onset, onset + window);
      const auto late = data.rows_in_steps(onset + window, steps);

      for (const Predictor& p : {Predictor::cady(models), Predictor::dense(models)}) {
        auto mse = [&](const model::CadyModel& m, const training::TransitionDataset& d) {
          Rng eval(derive_seed(cfg.train_seed, kEvalStream, seed));
          return training::one_step_mse(m, p.edge_probs, d, eval).expected_aggregate;
        };
        std::map<std::string, double> m;
        m["mse_pre"] = mse(*p.model, pre);
        m["mse_post"] = mse(*p.model, post);
        m["mse_increase"] = m["mse_post"] - m["mse_pre"];
        m["mse_late"] = mse(*p.model, late);
        model::CadyModel tuned = *p.model;
        Rng ft_rng(derive_seed(cfg.train_seed, kFinetuneStream, seed));
        training::finetune(tuned, p.edge_probs, post, ft, ft_rng);
        m["mse_finetuned"] = mse(tuned, late);
        m["mse_finetune_reduction"] = m["mse_late"] - m["mse_finetuned"];
        report.records.push_back({seed, label, p.name, m});
      }
    }
  }
  return report;
}

ExperimentReport run_suite(const std::string& name, const ExperimentConfig& cfg, const TrainedModels& models) {
  if (name == "freeze") return run_freeze_suite(cfg, models);
  if (name == "noise") return run_noise_suite(cfg, models);
  if (name == "missions") return run_missions_suite(cfg, models);
  if (name == "ablation") return run_fixed_graph_ablation(cfg, models);
  if (name == "interventions") return run_intervention_suite(cfg, models);
  throw std::invalid_argument("unknown suite '" + name + "' (expected freeze, noise, missions, ablation, interventions)");
}

}  // namespace cady::harness
