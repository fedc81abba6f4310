#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cady/harness/config.hpp"
#include "cady/harness/report.hpp"
#include "cady/harness/suites.hpp"
#include "doctest.h"

using namespace cady;
using namespace cady::harness;
namespace fs = std::filesystem;

TEST_CASE("parse_config: values and environment defaults") {
  const auto c = parse_config(
      "[experiment]\nenvironment = diffdrive\nseeds = 3,4\ntrain_seed = 9\n"
      "[model]\nhidden_size = 7\n"
      "[mppi]\nsigma = 0.5\n"
      "[mission]\nwaypoints = 1,2;3,4\n"
      "[interventions]\nschedules = 1:1;0.5:0.25\n");
  CHECK(c.environment == EnvKind::DiffDrive);
  CHECK(c.seeds == std::vector<std::uint64_t>{3, 4});
  CHECK(c.train_seed == 9);
  CHECK(c.spec.hidden_size == 7);
  CHECK(c.spec.state_dim == 3);
  CHECK(c.spec.angle_dims == std::vector<std::size_t>{2});
  CHECK(c.mppi.sigma == 0.5);
  REQUIRE(c.mission.waypoints.size() == 2);
  CHECK(c.mission.waypoints[1].x == 3.0);
  CHECK(c.mission.waypoints[1].y == 4.0);
  REQUIRE(c.intervention_schedules.size() == 2);
  CHECK(c.intervention_schedules[1].omega == 0.25);

  const auto d = parse_config("");
  CHECK(d.environment == EnvKind::Cartpole);
  CHECK(d.seeds.size() == 5);
  CHECK(d.spec.hidden_size == 3);
}

TEST_CASE("parse_config: rejections") {
  CHECK_THROWS_AS(parse_config("[bogus]\nx = 1\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("[train]\nlearning_rat = 0.1\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("[train]\nbatch_size = many\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("[experiment]\nenvironment = pendulum\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("[models]\ncady_checkpoint = a.json\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("[ablation]\nthreshold = 1.5\n"), std::invalid_argument);
  try {
    parse_config("[train]\nlearning_rat = 0.1\n");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("learning_rat") != std::string::npos);
  }
  try {
    load_config("/nonexistent/dir/x.ini");
    FAIL("expected an error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("/nonexistent/dir/x.ini") != std::string::npos);
  }
}

TEST_CASE("to_ini round trip and hash") {
  for (const auto kind : {EnvKind::Cartpole, EnvKind::DiffDrive}) {
    auto c = ExperimentConfig::defaults(kind);
    c.seeds = {7, 1};
    c.mppi.gamma = 0.1;
    c.noise_sweep = {0.3, 1.0 / 3.0};
    const auto back = parse_config(c.to_ini());
    CHECK(back.to_ini() == c.to_ini());
    CHECK(back.hash() == c.hash());
    CHECK(back.noise_sweep[1] == 1.0 / 3.0);
  }
  auto a = ExperimentConfig::defaults(EnvKind::Cartpole), b = a;
  b.train.learning_rate *= 2.0;
  CHECK(a.hash() != b.hash());
}

TEST_CASE("derive_seed") {
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 2, 4));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(2, 2, 3));
}

TEST_CASE("resolve_output_dir precedence") {
  ExperimentConfig c;
  CHECK(c.resolve_output_dir("cli") == fs::path("cli"));
  c.output_dir = "cfg";
  CHECK(c.resolve_output_dir() == fs::path("cfg"));
  CHECK(c.resolve_output_dir("cli") == fs::path("cli"));
}

TEST_CASE("degradation") {
  const auto d = degradation(90.0, 100.0);
  CHECK(d.pd == doctest::Approx(-0.10).epsilon(1e-12));
  CHECK(degradation(110.0, 100.0).pd == doctest::Approx(0.10).epsilon(1e-12));
  CHECK(degradation(5.0, 5.0).pd == 0.0);
  CHECK_THROWS_AS(degradation(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("metric directions") {
  CHECK(metric_direction("reward") == "higher");
  CHECK(metric_direction("pd") == "higher");
  CHECK(metric_direction("mse_late") == "lower");
  CHECK(metric_direction("whatever") == "n/a");
}

TEST_CASE("aggregate and records round trip") {
  std::vector<Record> recs;
  for (int i = 1; i <= 3; ++i) recs.push_back({static_cast<std::uint64_t>(i), "nominal", "cady", {{"reward", double(i)}}});
  recs.push_back({0, "nominal", "dense", {{"reward", 0.1}, {"steps", 1.0 / 3.0}}});
  const auto agg = aggregate(recs);
  REQUIRE(agg.size() == 3);
  CHECK(agg[0].model == "cady");
  CHECK(agg[0].count == 3);
  CHECK(agg[0].mean == 2.0);
  CHECK(agg[0].std == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));
  CHECK(agg[0].std == doctest::Approx(0.8165).epsilon(1e-4));
  CHECK(mean_metric(recs, "reward", "nominal", "cady") == 2.0);
  CHECK_THROWS(mean_metric(recs, "reward", "freeze", ""));

  std::stringstream ss;
  write_records_csv(ss, recs);
  const auto back = read_records_csv(ss);
  CHECK(back == recs);
  std::ostringstream a1, a2;
  write_aggregates_csv(a1, agg);
  write_aggregates_csv(a2, aggregate(back));
  CHECK(a1.str() == a2.str());
  CHECK(a1.str().rfind("condition,model,metric,direction,count,mean,std\n", 0) == 0);

  std::istringstream bad("seed,condition,model,metric,value\n1,a,b,reward,notanumber\n");
  CHECK_THROWS(read_records_csv(bad));
}

TEST_CASE("emit_report") {
  const fs::path dir = fs::temp_directory_path() / "cady_test_emit_report";
  fs::remove_all(dir);
  ExperimentReport r{"demo", {{0, "c", "m", {{"reward", 1.5}}}}, "[experiment]\n", 42, kCodeVersion};
  emit_report(r, dir);
  for (const char* f : {"records.csv", "records.json", "aggregates.csv", "aggregates.json", "config.ini"}) {
    CHECK(fs::exists(dir / f));
  }
  std::ifstream json(dir / "records.json");
  const std::string text((std::istreambuf_iterator<char>(json)), {});
  CHECK(text.find("\"config_hash\"") != std::string::npos);
  CHECK(text.find(kCodeVersion) != std::string::npos);

  ExperimentReport empty{"demo", {}, "", 0, kCodeVersion};
  CHECK_THROWS(emit_report(empty, dir));
  CHECK_THROWS(emit_report(r, dir, {"xml"}));
  fs::remove_all(dir);
}

TEST_CASE("reward curve CSV") {
  std::ostringstream os;
  write_reward_curve_csv(os, 3, {10.0, 20.5});
  CHECK(os.str() == "trial,reward,seed\n0,10,3\n1,20.5,3\n");
}

TEST_CASE("patrol mission") {
  const auto cfg = ExperimentConfig::defaults(EnvKind::DiffDrive);
  const auto m = patrol_mission(cfg, 750);
  CHECK(m.time_limit == doctest::Approx(75.0));
  REQUIRE(m.waypoints.size() % 4 == 0);
  CHECK(m.waypoints[0].x == 3.0);
  CHECK(m.waypoints[0].y == 0.0);
  CHECK(m.waypoints[3].x == 0.0);
  CHECK(m.waypoints[3].y == 0.0);
  // More path than the robot can cover at full speed.
  const double path = 3.0 * static_cast<double>(m.waypoints.size());
  CHECK(path > 750 * 0.1 * 1.0);
}

TEST_CASE("a fault-free episode has zero performance degradation") {
  auto cfg = ExperimentConfig::defaults(EnvKind::Cartpole);
  cfg.cem.population = 50;
  cfg.cem.iterations = 2;
  planning::EpisodeConfig ec;
  ec.max_steps = 30;
  const auto env = make_environment(cfg);
  const auto nominal = run_episode(cfg, *env, Predictor::oracle(), env::FaultConfig::none(), {}, 11, ec);
  const auto again = run_episode(cfg, *env, Predictor::oracle(), env::FaultConfig::none(), {}, 11, ec);
  const double r0 = episode_metrics(cfg, nominal).at("reward"), r1 = episode_metrics(cfg, again).at("reward");
  CHECK(degradation(r1, r0).pd == 0.0);
}

TEST_CASE("suites reject the wrong environment") {
  auto cfg = ExperimentConfig::defaults(EnvKind::DiffDrive);
  TrainedModels none{};
  CHECK_THROWS(run_suite("freeze", cfg, none));
  CHECK_THROWS(run_suite("bogus", cfg, none));
}

namespace {

ExperimentConfig tiny_diffdrive() {
  auto cfg = ExperimentConfig::defaults(EnvKind::DiffDrive);
  cfg.seeds = {0, 1};
  cfg.sysid_transitions = 300;
  cfg.train.max_epochs = 2;
  cfg.spec.hidden_size = 4;
  cfg.mppi.num_samples = 16;
  cfg.mppi.horizon = 5;
  cfg.mppi.iterations = 1;
  cfg.mission.waypoints = {{1.0, 0.0}};
  cfg.mission.time_limit = 2.0;
  cfg.noise_sweep = {0.1};
  return cfg;
}

ExperimentConfig tiny_cartpole() {
  auto cfg = ExperimentConfig::defaults(EnvKind::Cartpole);
  cfg.seeds = {0};
  cfg.trials = 2;
  cfg.train.max_epochs = 2;
  cfg.cem.population = 20;
  cfg.cem.iterations = 2;
  cfg.ablation_repetitions = 2;
  return cfg;
}

}  // namespace

TEST_CASE("noise sweep: the zero-variance point equals nominal runs") {
  const auto cfg = tiny_diffdrive();
  const auto models = train_models(cfg, cfg.train_seed);
  const auto report = run_noise_suite(cfg, models);
  std::size_t checked = 0;
  for (const auto& r : report.records) {
    if (r.condition != "noise_0") continue;
    const Predictor p = r.model == "cady" ? Predictor::cady(models) : Predictor::dense(models);
    const auto env = make_environment(cfg);
    const auto ep = run_episode(cfg, *env, p, env::FaultConfig::none(), {}, derive_seed(cfg.train_seed, 2, r.seed));
    CHECK(r.metrics == episode_metrics(cfg, ep));
    ++checked;
  }
  CHECK(checked == 4);
  CHECK(report.records.size() == 8);
}

TEST_CASE("ablation: identical seeds give identical results") {
  const auto cfg = tiny_cartpole();
  const auto models = train_models(cfg, cfg.train_seed);
  const auto a = run_fixed_graph_ablation(cfg, models);
  const auto b = run_fixed_graph_ablation(cfg, models);
  CHECK(a.records == b.records);
  CHECK(a.records.size() == 6);
}

TEST_CASE("shipped configs equal the environment defaults") {
  const fs::path dir = CADY_CONFIG_DIR;
  CHECK(load_config(dir / "cartpole.ini").to_ini() == ExperimentConfig::defaults(EnvKind::Cartpole).to_ini());
  CHECK(load_config(dir / "diffdrive.ini").to_ini() == ExperimentConfig::defaults(EnvKind::DiffDrive).to_ini());
}
