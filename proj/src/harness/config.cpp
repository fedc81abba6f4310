#include "cady/harness/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "cady/env/faults.hpp"

namespace cady::harness {

namespace pt = boost::property_tree;

std::string env_name(EnvKind kind) { return kind == EnvKind::Cartpole ? "cartpole" : "diffdrive"; }

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"experiment", {"environment", "seeds", "train_seed", "output_dir"}},
      {"model", {"hidden_size", "hidden_layers", "activation"}},
      {"train",
       {"batch_size", "max_epochs", "loss_delta_stop", "learning_rate", "trials", "sysid_transitions",
        "propagation"}},
      {"attribution", {"riemann_steps", "num_inputs", "rho_min"}},
      {"models", {"cady_checkpoint", "dense_checkpoint"}},
      {"cem", {"horizon", "population", "elite_ratio", "alpha", "iterations", "replan_frequency"}},
      {"mppi", {"horizon", "num_samples", "gamma", "sigma", "beta", "iterations"}},
      {"mission", {"waypoints", "arrival_radius", "time_limit", "start"}},
      {"freeze", {"onset_fraction"}},
      {"noise", {"variance", "trials", "sweep"}},
      {"ablation", {"repetitions", "threshold"}},
      {"interventions", {"onset_step", "window", "schedules", "finetune_epochs", "patrol_side"}},
  };
  return s;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(s);
  while (std::getline(is, cell, sep)) out.push_back(trim(cell));
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& what) {
  throw std::invalid_argument("config: " + key + " = '" + value + "': " + what);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) bad_value(key, v, "expected a number");
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) bad_value(key, v, "expected a non-negative integer");
  return out;
}

template <class T, class F>
std::vector<T> to_list(const std::string& key, const std::string& v, char sep, F parse) {
  std::vector<T> out;
  for (const auto& cell : split(v, sep)) out.push_back(parse(key, cell));
  if (out.empty()) bad_value(key, v, "empty list");
  return out;
}

// Reads typed values out of a validated tree.
class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  std::optional<std::string> get(const std::string& section, const std::string& key) const {
    const auto sec = tree_.get_child_optional(section);
    if (!sec) return std::nullopt;
    const auto v = sec->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return trim(*v);
  }
  template <class T>
  void number(const std::string& section, const std::string& key, T& out) const {
    if (const auto v = get(section, key)) {
      if constexpr (std::is_floating_point_v<T>) {
        out = to_double(section + "." + key, *v);
      } else {
        out = static_cast<T>(to_uint(section + "." + key, *v));
      }
    }
  }
  void text(const std::string& section, const std::string& key, std::string& out) const {
    if (const auto v = get(section, key)) out = *v;
  }

 private:
  const pt::ptree& tree_;
};

// Shortest text that parses back to the same double.
std::string fmt(double v) {
  char buf[32];
  return {buf, std::to_chars(buf, buf + sizeof buf, v).ptr};
}

template <class T>
std::string join(const std::vector<T>& values, const char* sep) {
  std::ostringstream os;
  for (std::size_t i = 0; i < values.size(); ++i) {
    os << (i ? sep : "");
    if constexpr (std::is_floating_point_v<T>) os << fmt(values[i]);
    else os << values[i];
  }
  return os.str();
}

}  // namespace

ExperimentConfig ExperimentConfig::defaults(EnvKind kind) {
  ExperimentConfig c;
  c.environment = kind;
  if (kind == EnvKind::Cartpole) {
    c.spec.state_dim = 4;
    c.spec.action_dim = 1;
    c.spec.hidden_size = 3;
    c.cem.horizon = 15;
  } else {
    c.spec.state_dim = 3;
    c.spec.action_dim = 2;
    c.spec.hidden_size = 20;
    c.spec.angle_dims = {2};
    c.mppi.horizon = 20;
    c.mppi.iterations = 10;
    c.seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  }
  c.mission.waypoints = {{3.0, 0.0}, {3.0, 3.0}, {0.0, 3.0}};
  return c;
}

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw std::invalid_argument("config: experiment.seeds must not be empty");
  spec.validate();
  train.validate();
  attribution.validate(spec.input_dim());
  if (!(rho_min > 0.0 && rho_min < 0.5)) throw std::invalid_argument("config: attribution.rho_min must lie in (0, 0.5)");
  if (trials < 1) throw std::invalid_argument("config: train.trials must be >= 1");
  if (sysid_transitions < 1) throw std::invalid_argument("config: train.sysid_transitions must be >= 1");
  if (cady_checkpoint.empty() != dense_checkpoint.empty()) {
    throw std::invalid_argument("config: models.cady_checkpoint and models.dense_checkpoint must be set together");
  }
  cem.validate();
  mppi.validate();
  mission.validate();
  env::FaultConfig::freeze(0, freeze_onset).validate(spec.state_dim);
  env::FaultConfig::gaussian_noise(noise_variance).validate(spec.state_dim);
  for (double v : noise_sweep) env::FaultConfig::gaussian_noise(v).validate(spec.state_dim);
  if (noise_trials < 1) throw std::invalid_argument("config: noise.trials must be >= 1");
  if (ablation_repetitions < 1) throw std::invalid_argument("config: ablation.repetitions must be >= 1");
  if (!(ablation_threshold > 0.0 && ablation_threshold < 1.0)) {
    throw std::invalid_argument("config: ablation.threshold must lie in (0, 1)");
  }
  if (intervention_window < 1) throw std::invalid_argument("config: interventions.window must be >= 1");
  if (intervention_schedules.empty()) throw std::invalid_argument("config: interventions.schedules must not be empty");
  for (const auto& g : intervention_schedules) {
    env::InterventionSchedule{intervention_onset, {g.v, g.omega}}.validate(2);
  }
  if (!(patrol_side > 0.0)) throw std::invalid_argument("config: interventions.patrol_side must be > 0");
}

std::string ExperimentConfig::to_ini() const {
  std::ostringstream os;
  os << "[experiment]\n"
     << "environment = " << env_name(environment) << "\n"
     << "seeds = " << join(seeds, ",") << "\n"
     << "train_seed = " << train_seed << "\n"
     << "output_dir = " << output_dir << "\n\n";
  os << "[model]\n"
     << "hidden_size = " << spec.hidden_size << "\n"
     << "hidden_layers = " << spec.hidden_layers << "\n"
     << "activation = " << model::activation_name(spec.activation) << "\n\n";
  os << "[train]\n"
     << "batch_size = " << train.batch_size << "\n"
     << "max_epochs = " << train.max_epochs << "\n"
     << "loss_delta_stop = " << fmt(train.loss_delta_stop) << "\n"
     << "learning_rate = " << fmt(train.learning_rate) << "\n"
     << "trials = " << trials << "\n"
     << "sysid_transitions = " << sysid_transitions << "\n"
     << "propagation = " << (propagation == planning::Propagation::MeanOnly ? "mean" : "sample") << "\n\n";
  os << "[attribution]\n"
     << "riemann_steps = " << attribution.riemann_steps << "\n"
     << "num_inputs = " << attribution.num_inputs << "\n"
     << "rho_min = " << fmt(rho_min) << "\n\n";
  os << "[models]\n"
     << "cady_checkpoint = " << cady_checkpoint << "\n"
     << "dense_checkpoint = " << dense_checkpoint << "\n\n";
  os << "[cem]\n"
     << "horizon = " << cem.horizon << "\n"
     << "population = " << cem.population << "\n"
     << "elite_ratio = " << fmt(cem.elite_ratio) << "\n"
     << "alpha = " << fmt(cem.alpha) << "\n"
     << "iterations = " << cem.iterations << "\n"
     << "replan_frequency = " << cem.replan_frequency << "\n\n";
  os << "[mppi]\n"
     << "horizon = " << mppi.horizon << "\n"
     << "num_samples = " << mppi.num_samples << "\n"
     << "gamma = " << fmt(mppi.gamma) << "\n"
     << "sigma = " << fmt(mppi.sigma) << "\n"
     << "beta = " << fmt(mppi.beta) << "\n"
     << "iterations = " << mppi.iterations << "\n\n";
  std::vector<std::string> wps;
  for (const auto& w : mission.waypoints) wps.push_back(fmt(w.x) + "," + fmt(w.y));
  os << "[mission]\n"
     << "waypoints = " << join(wps, ";") << "\n"
     << "arrival_radius = " << fmt(mission.arrival_radius) << "\n"
     << "time_limit = " << fmt(mission.time_limit) << "\n"
     << "start = " << fmt(mission.start[0]) << "," << fmt(mission.start[1]) << "," << fmt(mission.start[2])
     << "\n\n";
  os << "[freeze]\n"
     << "onset_fraction = " << fmt(freeze_onset) << "\n\n";
  os << "[noise]\n"
     << "variance = " << fmt(noise_variance) << "\n"
     << "trials = " << noise_trials << "\n"
     << "sweep = " << join(noise_sweep, ",") << "\n\n";
  os << "[ablation]\n"
     << "repetitions = " << ablation_repetitions << "\n"
     << "threshold = " << fmt(ablation_threshold) << "\n\n";
  std::vector<std::string> sched;
  for (const auto& g : intervention_schedules) sched.push_back(fmt(g.v) + ":" + fmt(g.omega));
  os << "[interventions]\n"
     << "onset_step = " << intervention_onset << "\n"
     << "window = " << intervention_window << "\n"
     << "schedules = " << join(sched, ";") << "\n"
     << "finetune_epochs = " << finetune_epochs << "\n"
     << "patrol_side = " << fmt(patrol_side) << "\n";
  return os.str();
}

std::uint64_t ExperimentConfig::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : to_ini()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::filesystem::path ExperimentConfig::resolve_output_dir(const std::optional<std::string>& override_dir) const {
  if (override_dir && !override_dir->empty()) return *override_dir;
  if (!output_dir.empty()) return output_dir;
  if (const char* env = std::getenv("CADY_OUT_DIR"); env && *env) return env;
  return "out";
}

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream is(text);
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    const auto it = schema().find(section);
    if (it == schema().end()) throw std::invalid_argument("config: unknown section [" + section + "]");
    if (!body.data().empty()) throw std::invalid_argument("config: key '" + section + "' outside any section");
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) throw std::invalid_argument("config: unknown key '" + key + "' in [" + section + "]");
    }
  }

  const Reader r(tree);
  EnvKind kind = EnvKind::Cartpole;
  if (const auto env = r.get("experiment", "environment")) {
    if (*env == "cartpole") {
      kind = EnvKind::Cartpole;
    } else if (*env == "diffdrive") {
      kind = EnvKind::DiffDrive;
    } else {
      bad_value("experiment.environment", *env, "expected cartpole or diffdrive");
    }
  }
  ExperimentConfig c = ExperimentConfig::defaults(kind);

  if (const auto v = r.get("experiment", "seeds")) c.seeds = to_list<std::uint64_t>("experiment.seeds", *v, ',', to_uint);
  r.number("experiment", "train_seed", c.train_seed);
  r.text("experiment", "output_dir", c.output_dir);

  r.number("model", "hidden_size", c.spec.hidden_size);
  r.number("model", "hidden_layers", c.spec.hidden_layers);
  if (const auto v = r.get("model", "activation")) c.spec.activation = model::parse_activation(*v);

  r.number("train", "batch_size", c.train.batch_size);
  r.number("train", "max_epochs", c.train.max_epochs);
  r.number("train", "loss_delta_stop", c.train.loss_delta_stop);
  r.number("train", "learning_rate", c.train.learning_rate);
  r.number("train", "trials", c.trials);
  r.number("train", "sysid_transitions", c.sysid_transitions);
  if (const auto v = r.get("train", "propagation")) {
    if (*v == "sample") {
      c.propagation = planning::Propagation::SampleGaussian;
    } else if (*v == "mean") {
      c.propagation = planning::Propagation::MeanOnly;
    } else {
      bad_value("train.propagation", *v, "expected sample or mean");
    }
  }

  r.number("attribution", "riemann_steps", c.attribution.riemann_steps);
  r.number("attribution", "num_inputs", c.attribution.num_inputs);
  r.number("attribution", "rho_min", c.rho_min);

  r.text("models", "cady_checkpoint", c.cady_checkpoint);
  r.text("models", "dense_checkpoint", c.dense_checkpoint);

  r.number("cem", "horizon", c.cem.horizon);
  r.number("cem", "population", c.cem.population);
  r.number("cem", "elite_ratio", c.cem.elite_ratio);
  r.number("cem", "alpha", c.cem.alpha);
  r.number("cem", "iterations", c.cem.iterations);
  r.number("cem", "replan_frequency", c.cem.replan_frequency);

  r.number("mppi", "horizon", c.mppi.horizon);
  r.number("mppi", "num_samples", c.mppi.num_samples);
  r.number("mppi", "gamma", c.mppi.gamma);
  r.number("mppi", "sigma", c.mppi.sigma);
  r.number("mppi", "beta", c.mppi.beta);
  r.number("mppi", "iterations", c.mppi.iterations);

  if (const auto v = r.get("mission", "waypoints")) {
    c.mission.waypoints.clear();
    for (const auto& pair : split(*v, ';')) {
      const auto xy = to_list<double>("mission.waypoints", pair, ',', to_double);
      if (xy.size() != 2) bad_value("mission.waypoints", pair, "expected x,y");
      c.mission.waypoints.push_back({xy[0], xy[1]});
    }
  }
  r.number("mission", "arrival_radius", c.mission.arrival_radius);
  r.number("mission", "time_limit", c.mission.time_limit);
  if (const auto v = r.get("mission", "start")) {
    const auto s = to_list<double>("mission.start", *v, ',', to_double);
    if (s.size() != 3) bad_value("mission.start", *v, "expected x,y,theta");
    c.mission.start = {s[0], s[1], s[2]};
  }

  r.number("freeze", "onset_fraction", c.freeze_onset);
  r.number("noise", "variance", c.noise_variance);
  r.number("noise", "trials", c.noise_trials);
  if (const auto v = r.get("noise", "sweep")) c.noise_sweep = to_list<double>("noise.sweep", *v, ',', to_double);
  r.number("ablation", "repetitions", c.ablation_repetitions);
  r.number("ablation", "threshold", c.ablation_threshold);

  r.number("interventions", "onset_step", c.intervention_onset);
  r.number("interventions", "window", c.intervention_window);
  if (const auto v = r.get("interventions", "schedules")) {
    c.intervention_schedules.clear();
    for (const auto& pair : split(*v, ';')) {
      const auto g = to_list<double>("interventions.schedules", pair, ':', to_double);
      if (g.size() != 2) bad_value("interventions.schedules", pair, "expected gain_v:gain_omega");
      c.intervention_schedules.push_back({g[0], g[1]});
    }
  }
  r.number("interventions", "finetune_epochs", c.finetune_epochs);
  r.number("interventions", "patrol_side", c.patrol_side);

  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace cady::harness
