#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cady/harness/config.hpp"
#include "cady/harness/report.hpp"
#include "cady/harness/suites.hpp"
#include "cady/model/checkpoint.hpp"

namespace fs = std::filesystem;
using namespace cady;
using namespace cady::harness;

namespace {

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

ExperimentConfig resolve_config(const GlobalOptions& g) {
  ExperimentConfig cfg = g.config.empty() ? ExperimentConfig::defaults(EnvKind::Cartpole) : load_config(g.config);
  if (g.seed) cfg.train_seed = *g.seed;
  return cfg;
}

fs::path output_root(const GlobalOptions& g, const ExperimentConfig& cfg) {
  return cfg.resolve_output_dir(g.out.empty() ? std::nullopt : std::optional<std::string>(g.out));
}

std::ofstream open_file(const fs::path& p) {
  fs::create_directories(p.parent_path().empty() ? fs::path(".") : p.parent_path());
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write '" + p.string() + "'");
  return os;
}

training::TransitionDataset load_dataset(const fs::path& p, const ExperimentConfig& cfg) {
  std::ifstream is(p);
  if (!is) throw std::runtime_error("cannot open dataset '" + p.string() + "'");
  const auto env = make_environment(cfg);
  return training::TransitionDataset::read_csv(is, env->state_dim(), env->action_dim(), env->angle_dims());
}

std::pair<std::vector<std::string>, std::vector<std::string>> edge_names(const ExperimentConfig& cfg) {
  const auto env = make_environment(cfg);
  auto parents = env->state_names();
  for (const auto& a : env->action_names()) parents.push_back(a);
  std::vector<std::string> children;
  for (const auto& s : env->state_names()) children.push_back("d_" + s);
  return {parents, children};
}

int cmd_train(const GlobalOptions& g, const std::string& mode) {
  const ExperimentConfig cfg = resolve_config(g);
  const EnvKind expected = mode == "mbrl" ? EnvKind::Cartpole : EnvKind::DiffDrive;
  if (cfg.environment != expected) {
    throw std::invalid_argument("train " + mode + " needs environment " + env_name(expected) + ", config has " +
                                env_name(cfg.environment));
  }
  const auto models = train_models(cfg, cfg.train_seed);
  const fs::path dir = output_root(g, cfg) / "models";
  save_models(models, cfg, dir);
  if (!models.validation.empty()) {
    auto os = open_file(dir / "validation.csv");
    models.validation.write_csv(os);
  }
  std::cout << "wrote " << dir.string() << '\n';
  return 0;
}

int cmd_attribute(const GlobalOptions& g, const std::string& checkpoint, const std::string& data) {
  const ExperimentConfig cfg = resolve_config(g);
  const auto ck = model::load_checkpoint(checkpoint);
  causal::EdgeProbMatrix pd;
  if (!data.empty()) {
    Rng rng(derive_seed(cfg.train_seed, 7, 0));
    pd = training::estimate_distribution(ck.model, load_dataset(data, cfg), cfg.attribution, cfg.rho_min,
                                         causal::cube_root_smoothing, rng);
  } else if (ck.edge_probs) {
    pd = *ck.edge_probs;
  } else {
    throw std::invalid_argument("checkpoint '" + checkpoint + "' has no edge probabilities; pass --data to estimate them");
  }
  const fs::path path = output_root(g, cfg) / "edge_probs.csv";
  auto os = open_file(path);
  const auto [parents, children] = edge_names(cfg);
  causal::write_edge_csv(os, pd, parents, children);
  std::cout << "wrote " << path.string() << '\n';
  return 0;
}

int cmd_eval(const GlobalOptions& g, const std::string& checkpoint, const std::string& data) {
  const ExperimentConfig cfg = resolve_config(g);
  const auto ck = model::load_checkpoint(checkpoint);
  const auto& s = ck.model.spec();
  const auto pd = ck.edge_probs.value_or(causal::EdgeProbMatrix::ones(s.input_dim(), s.state_dim));
  Rng rng(derive_seed(cfg.train_seed, 8, 0));
  const auto mse = training::one_step_mse(ck.model, pd, load_dataset(data, cfg), rng);
  const nlohmann::json j{{"checkpoint", checkpoint},
                         {"data", data},
                         {"mse_per_dim", mse.per_dim},
                         {"mse", mse.aggregate},
                         {"mse_expected_per_dim", mse.expected_per_dim},
                         {"mse_expected", mse.expected_aggregate}};
  const fs::path path = output_root(g, cfg) / "eval.json";
  auto os = open_file(path);
  os << j.dump(1) << '\n';
  std::cout << j.dump() << '\n';
  return 0;
}

int cmd_plan(const GlobalOptions& g, const std::string& checkpoint, double noise, int freeze) {
  const ExperimentConfig cfg = resolve_config(g);
  std::optional<model::Checkpoint> ck;
  Predictor predictor = Predictor::oracle();
  if (!checkpoint.empty()) {
    ck = model::load_checkpoint(checkpoint);
    const auto& s = ck->model.spec();
    predictor = {"model", &ck->model, ck->edge_probs.value_or(causal::EdgeProbMatrix::ones(s.input_dim(), s.state_dim)),
                 std::nullopt};
  }
  env::FaultConfig fault;
  if (noise > 0.0 && freeze >= 0) throw std::invalid_argument("choose at most one of --noise and --freeze");
  if (noise > 0.0) fault = env::FaultConfig::gaussian_noise(noise);
  if (freeze >= 0) fault = env::FaultConfig::freeze(static_cast<std::size_t>(freeze), cfg.freeze_onset);
  const auto env = make_environment(cfg);
  fault.validate(env->state_dim());
  const auto ep = run_episode(cfg, *env, predictor, fault, {}, derive_seed(cfg.train_seed, 2, 0));
  const fs::path path = output_root(g, cfg) / "trajectory.csv";
  auto os = open_file(path);
  planning::write_trajectory_csv(os, ep, env->state_names(), env->action_names());
  nlohmann::json summary = nlohmann::json::object();
  for (const auto& [k, v] : episode_metrics(cfg, ep)) summary[k] = v;
  std::cout << summary.dump() << '\n';
  return 0;
}

int cmd_suite(const GlobalOptions& g, const std::string& name) {
  const ExperimentConfig cfg = resolve_config(g);
  const fs::path root = output_root(g, cfg);
  const auto models = obtain_models(cfg);
  if (cfg.cady_checkpoint.empty()) save_models(models, cfg, root / "models");
  const auto report = run_suite(name, cfg, models);
  emit_report(report, root / name);
  std::cout << "wrote " << (root / name).string() << '\n';
  return 0;
}

int cmd_report(const GlobalOptions& g, const std::string& records) {
  std::ifstream is(records);
  if (!is) throw std::runtime_error("cannot open records '" + records + "'");
  const auto recs = read_records_csv(is);
  const ExperimentConfig cfg = resolve_config(g);
  const fs::path path = output_root(g, cfg) / "aggregates.csv";
  auto os = open_file(path);
  write_aggregates_csv(os, aggregate(recs));
  write_aggregates_csv(std::cout, aggregate(recs));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal-masked dynamics models: training, attribution, planning and robustness suites"};
  app.require_subcommand(1);
  app.fallthrough();
  app.failure_message(CLI::FailureMessage::help);
  GlobalOptions g;
  app.add_option("--config", g.config, "Experiment INI file");
  app.add_option("--seed", g.seed, "Master seed (overrides experiment.train_seed)");
  app.add_option("--out", g.out, "Output directory (default: experiment.output_dir, $CADY_OUT_DIR, ./out)");

  std::string mode, suite, checkpoint, data, records;
  double noise = 0.0;
  int freeze = -1;

  auto* train = app.add_subcommand("train", "Train CADY and dense models");
  train->add_option("mode", mode, "mbrl (cartpole) or sysid (diffdrive)")->required()->check(CLI::IsMember({"mbrl", "sysid"}));
  auto* attribute = app.add_subcommand("attribute", "Export the edge probability heat map");
  attribute->add_option("--checkpoint", checkpoint, "Model checkpoint")->required();
  attribute->add_option("--data", data, "Dataset CSV; re-estimates from the checkpoint's model");
  auto* eval = app.add_subcommand("eval", "One-step prediction error");
  eval->add_option("--checkpoint", checkpoint, "Model checkpoint")->required();
  eval->add_option("--data", data, "Dataset CSV")->required();
  auto* plan = app.add_subcommand("plan", "Run one MPC episode");
  plan->add_option("--checkpoint", checkpoint, "Model checkpoint (default: true simulator)");
  plan->add_option("--noise", noise, "Observation noise variance");
  plan->add_option("--freeze", freeze, "Index of the state variable to freeze");
  auto* suite_cmd = app.add_subcommand("suite", "Run an experiment suite");
  suite_cmd->add_option("name", suite, "freeze | noise | missions | ablation | interventions")
      ->required()
      ->check(CLI::IsMember({"freeze", "noise", "missions", "ablation", "interventions"}));
  auto* report = app.add_subcommand("report", "Recompute aggregates from a records CSV");
  report->add_option("--records", records, "records.csv")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (train->parsed()) return cmd_train(g, mode);
    if (attribute->parsed()) return cmd_attribute(g, checkpoint, data);
    if (eval->parsed()) return cmd_eval(g, checkpoint, data);
    if (plan->parsed()) return cmd_plan(g, checkpoint, noise, freeze);
    if (suite_cmd->parsed()) return cmd_suite(g, suite);
    if (report->parsed()) return cmd_report(g, records);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
