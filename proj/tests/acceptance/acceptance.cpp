// Acceptance suite: one PASS/FAIL line per criterion (C1-C11), then property
// checks (P1, P2) that reuse the same models. Set CADY_ACCEPTANCE to a
// comma-separated list such as "1,3b,P2" to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <boost/math/distributions/students_t.hpp>

#include "cady/autodiff/graph.hpp"
#include "cady/causal/attribution.hpp"
#include "cady/causal/edge_probs.hpp"
#include "cady/harness/config.hpp"
#include "cady/harness/report.hpp"
#include "cady/harness/suites.hpp"
#include "cady/model/model.hpp"
#include "cady/planning/dynamics.hpp"
#include "cady/planning/mpc.hpp"

using namespace cady;
using namespace cady::harness;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kRandomPolicyStream = 9;
constexpr std::size_t kMbrlSeeds = 5;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------- shared models

std::map<std::uint64_t, TrainedModels> g_cartpole, g_diffdrive;

const TrainedModels& cartpole_models(std::uint64_t seed) {
  auto it = g_cartpole.find(seed);
  if (it == g_cartpole.end()) {
    it = g_cartpole.emplace(seed, train_models(ExperimentConfig::defaults(EnvKind::Cartpole), seed)).first;
  }
  return it->second;
}

const TrainedModels& diffdrive_models(std::uint64_t seed) {
  auto it = g_diffdrive.find(seed);
  if (it == g_diffdrive.end()) {
    it = g_diffdrive.emplace(seed, train_models(ExperimentConfig::defaults(EnvKind::DiffDrive), seed)).first;
  }
  return it->second;
}

// ---------------------------------------------------------------- criteria

Outcome parameter_count() {
  model::ModelSpec s;
  s.state_dim = 4;
  s.action_dim = 1;
  s.hidden_size = 3;
  Rng rng(0);
  const auto n = model::CadyModel::build(s, rng).parameter_count();
  return {n == 230, fmt("cartpole CADY model has %zu parameters (expected 230)", n)};
}

Outcome gradient_check() {
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<int> dim(1, 6), depth(1, 3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const std::size_t in = dim(gen), batch = dim(gen), out = dim(gen), layers = depth(gen);
    std::vector<std::size_t> widths{in};
    for (std::size_t l = 0; l < layers; ++l) widths.push_back(dim(gen));
    widths.push_back(out);
    std::vector<ad::Tensor> inputs;
    auto rnd = [&](std::size_t r, std::size_t c) {
      ad::Tensor t(r, c);
      for (double& v : t.storage()) v = u(gen);
      return t;
    };
    inputs.push_back(rnd(in, batch));
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
      inputs.push_back(rnd(widths[l + 1], widths[l]));
      inputs.push_back(rnd(widths[l + 1], 1));
    }
    const ad::Graph g = [n = widths.size() - 1](ad::Tape&, std::span<const ad::Var> v) {
      ad::Var h = v[0];
      for (std::size_t l = 0; l < n; ++l) {
        h = ad::add(ad::matmul(v[1 + 2 * l], h), v[2 + 2 * l]);
        if (l + 1 < n) h = ad::tanh(h);
      }
      return std::vector<ad::Var>{ad::mean(ad::square(h))};
    };
    worst = std::max(worst, ad::finite_diff_check(g, inputs, 1e-5));
  }
  return {worst < 1e-4, fmt("max relative gradient error over 50 random MLPs %.3e (< 1e-4)", worst)};
}

Outcome ig_linear_exactness() {
  Rng rng(5);
  model::ModelSpec s;
  s.state_dim = 3;
  s.action_dim = 2;
  s.hidden_size = 6;
  s.activation = model::Activation::Identity;
  const auto m = model::CadyModel::build(s, rng);
  const std::size_t in = s.input_dim(), n = s.state_dim;
  const auto ones = causal::CausalMask::ones(in, n);
  const auto mu0 = m.forward(std::vector<double>(in, 0.0), ones).mean;
  std::vector<double> w(n * in);
  for (std::size_t i = 0; i < in; ++i) {
    std::vector<double> e(in, 0.0);
    e[i] = 1.0;
    const auto mu = m.forward(e, ones).mean;
    for (std::size_t j = 0; j < n; ++j) w[j * in + i] = mu[j] - mu0[j];
  }
  double worst = 0.0;
  const causal::AttributionConfig cfg;
  for (int t = 0; t < 20; ++t) {
    std::vector<double> x(in);
    for (double& v : x) v = 2.0 * standard_normal(rng);
    for (std::size_t j = 0; j < n; ++j) {
      const auto a = causal::integrated_gradients(m, x, cfg, j);
      for (std::size_t i = 0; i < in; ++i) worst = std::max(worst, std::abs(a[i] - w[j * in + i] * x[i]));
    }
  }
  return {worst < 1e-10, fmt("linear model: max |IG - w x| %.3e (< 1e-10)", worst)};
}

Outcome ig_completeness() {
  const auto& models = cartpole_models(0);
  const auto& fc = models.dense;
  const auto& data = models.dataset;
  const std::size_t dim = fc.spec().input_dim(), n = fc.spec().state_dim;
  const auto raw = data.inputs();
  const auto ones = causal::CausalMask::ones(dim, n);
  const auto mu0 = fc.forward(std::vector<double>(dim, 0.0), ones).mean;
  causal::AttributionConfig cfg;
  cfg.riemann_steps = 128;
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), 0);
  Rng rng(derive_seed(0, 4, 0));
  std::shuffle(rows.begin(), rows.end(), rng);
  rows.resize(std::min<std::size_t>(100, rows.size()));
  double worst = 0.0;
  for (const std::size_t r : rows) {
    std::vector<double> x(dim);
    fc.normalizer().normalize_input(std::span(raw).subspan(r * dim, dim), x);
    const auto mu = fc.forward(x, ones).mean;
    const auto all = causal::integrated_gradients_all(fc, x, cfg);
    for (std::size_t j = 0; j < n; ++j) {
      double total = 0.0;
      for (std::size_t i = 0; i < dim; ++i) total += all[i * n + j];
      worst = std::max(worst, std::abs(total - (mu[j] - mu0[j])));
    }
  }
  return {worst < 1e-3 && rows.size() == 100,
          fmt("trained cartpole f^C, %zu inputs, m=128: max completeness gap %.3e (< 1e-3)", rows.size(), worst)};
}

Outcome mask_enumeration() {
  Rng rng(77);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    std::vector<double> p(6);
    for (double& v : p) v = 0.02 + 0.96 * uniform01(rng);
    const causal::EdgeProbMatrix pm(3, 2, p);
    double total = 0.0;
    for (unsigned code = 0; code < 64; ++code) {
      causal::CausalMask m(3, 2, 0);
      for (std::size_t c = 0; c < 6; ++c) m(c / 2, c % 2) = (code >> c) & 1U;
      total += std::exp(causal::graph_log_prob(pm, m));
    }
    worst = std::max(worst, std::abs(total - 1.0));
  }
  return {worst < 1e-12, fmt("20 random 3x2 distributions: max |sum P(M) - 1| %.3e (< 1e-12)", worst)};
}

Outcome causal_recovery() {
  // Inputs (x, y, theta, v, omega), outputs (dx, dy, dtheta).
  const std::set<std::pair<std::size_t, std::size_t>> truth{{2, 0}, {3, 0}, {2, 1}, {3, 1}, {4, 2}};
  std::size_t passed = 0;
  std::string detail;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto& pd = diffdrive_models(seed).edge_probs;
    double min_true = 1.0, max_other = 0.0;
    for (std::size_t i = 0; i < pd.rows(); ++i) {
      for (std::size_t j = 0; j < pd.cols(); ++j) {
        if (truth.count({i, j})) min_true = std::min(min_true, pd(i, j));
        else max_other = std::max(max_other, pd(i, j));
      }
    }
    const bool ok = min_true >= 0.5 && max_other <= 0.3;
    passed += ok;
    detail += fmt("seed %llu: min true %.3f max other %.3f %s; ", static_cast<unsigned long long>(seed), min_true,
                  max_other, ok ? "ok" : "miss");
  }
  return {passed >= 2, detail + fmt("%zu/3 seeds recovered (>= 2)", passed)};
}

Outcome oracle_planners() {
  const auto cp = ExperimentConfig::defaults(EnvKind::Cartpole);
  const auto cp_env = make_environment(cp);
  double total = 0.0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    total += run_episode(cp, *cp_env, Predictor::oracle(), {}, {}, derive_seed(0, 2, s)).total_reward;
  }
  const double mean = total / 5.0;

  const auto dd = ExperimentConfig::defaults(EnvKind::DiffDrive);
  const auto dd_env = make_environment(dd);
  std::size_t successes = 0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    successes += run_episode(dd, *dd_env, Predictor::oracle(), {}, {}, derive_seed(0, 2, s)).success;
  }
  return {mean >= 190.0 && successes == 5,
          fmt("oracle CEM cartpole mean reward %.1f (>= 190); oracle MPPI 3-waypoint mission %zu/5 (5/5)", mean,
              successes)};
}

Outcome mbrl_improvement() {
  const auto cfg = ExperimentConfig::defaults(EnvKind::Cartpole);
  double final_total = 0.0, random_total = 0.0;
  std::size_t random_count = 0;
  for (std::uint64_t seed = 0; seed < kMbrlSeeds; ++seed) {
    const auto& curve = cartpole_models(seed).reward_curve;
    if (curve.size() < 5) return {false, "reward curve shorter than 5 trials"};
    double last5 = 0.0;
    for (std::size_t t = curve.size() - 5; t < curve.size(); ++t) last5 += curve[t];
    final_total += last5 / 5.0;

    // Independent random-policy episodes.
    const auto env = make_environment(cfg);
    planning::RandomPlanner random({env->action_low(), env->action_high()});
    planning::CartpoleOracle unused;
    planning::CartpoleObjective objective;
    planning::RolloutEvaluator evaluator(unused, objective);
    for (std::uint64_t k = 0; k < 10; ++k) {
      Rng rng(derive_seed(seed, kRandomPolicyStream, k));
      random_total += planning::mpc_run(*env, random, evaluator, {}, {}, {}, rng).total_reward;
      ++random_count;
    }
  }
  const double final_mean = final_total / kMbrlSeeds, random_mean = random_total / static_cast<double>(random_count);
  return {final_mean >= 2.0 * random_mean,
          fmt("final-5 trial mean %.1f over %zu seeds vs random policy %.1f over %zu episodes (ratio %.2f, >= 2)",
              final_mean, kMbrlSeeds, random_mean, random_count, final_mean / random_mean)};
}

// Runs a suite once per MBRL model seed and pools the records.
std::vector<Record> pooled(const std::function<ExperimentReport(const ExperimentConfig&, const TrainedModels&)>& suite,
                           const std::function<void(ExperimentConfig&, std::uint64_t)>& adjust) {
  std::vector<Record> all;
  for (std::uint64_t seed = 0; seed < kMbrlSeeds; ++seed) {
    auto cfg = ExperimentConfig::defaults(EnvKind::Cartpole);
    cfg.train_seed = seed;
    adjust(cfg, seed);
    auto rep = suite(cfg, cartpole_models(seed));
    all.insert(all.end(), rep.records.begin(), rep.records.end());
  }
  return all;
}

double faulted_pd(const std::vector<Record>& recs, const std::string& model) {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto& r : recs) {
    if (r.model == model && r.condition != "nominal") {
      s += r.metrics.at("pd");
      ++n;
    }
  }
  return s / static_cast<double>(n);
}

Outcome robustness() {
  const auto freeze = pooled(run_freeze_suite, [](ExperimentConfig& c, std::uint64_t s) { c.seeds = {s}; });
  const auto noise = pooled(run_noise_suite, [](ExperimentConfig& c, std::uint64_t) { c.noise_trials = 4; });
  const double fc = faulted_pd(freeze, "cady"), fd = faulted_pd(freeze, "dense");
  const double nc = faulted_pd(noise, "cady"), nd = faulted_pd(noise, "dense");
  return {fc >= fd && nc >= nd,
          fmt("mean PD freeze cady %.4f vs dense %.4f; noise N(0,0.05) cady %.4f vs dense %.4f (cady >= dense)", fc,
              fd, nc, nd)};
}

const std::vector<Record>& intervention_records() {
  static std::optional<std::vector<Record>> recs;
  if (!recs) {
    const auto cfg = ExperimentConfig::defaults(EnvKind::DiffDrive);
    recs = run_intervention_suite(cfg, diffdrive_models(cfg.train_seed)).records;
  }
  return *recs;
}

Outcome interventions() {
  const auto cfg = ExperimentConfig::defaults(EnvKind::DiffDrive);
  const auto& recs = intervention_records();
  const double w_only = mean_metric(recs, "mse_increase", "gain_v1_w0.5", "cady");
  const double v_only = mean_metric(recs, "mse_increase", "gain_v0.5_w1", "cady");
  bool reduces = true;
  std::string detail = fmt("cady MSE increase omega-only %.3e < v-only %.3e; fine-tune reduction", w_only, v_only);
  for (const auto& g : cfg.intervention_schedules) {
    if (g.v == 1.0 && g.omega == 1.0) continue;
    std::ostringstream label;
    label << "gain_v" << g.v << "_w" << g.omega;
    const double red = mean_metric(recs, "mse_finetune_reduction", label.str(), "cady");
    reduces = reduces && red > 0.0;
    detail += fmt(" %s %.3e", label.str().c_str(), red);
  }
  return {w_only < v_only && reduces, detail + " (all > 0)"};
}

Outcome ablation() {
  const auto recs = pooled(run_fixed_graph_ablation, [](ExperimentConfig& c, std::uint64_t) {
    c.ablation_repetitions = 2;
  });
  const double sampling = mean_metric(recs, "reward", "", "sampling"), fixed = mean_metric(recs, "reward", "", "fixed");
  std::size_t reps = 0;
  for (const auto& r : recs) reps += r.model == "sampling";
  return {sampling >= fixed,
          fmt("%zu reps: sampling mean reward %.2f vs thresholded fixed graph %.2f (sampling >= fixed)", reps,
              sampling, fixed)};
}

std::string file_bytes(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

Outcome rerun_identical() {
  auto cfg = ExperimentConfig::defaults(EnvKind::Cartpole);
  cfg.trials = 3;
  cfg.seeds = {0};
  cfg.ablation_repetitions = 2;
  const fs::path root = fs::temp_directory_path() / "cady_acceptance_rerun";
  fs::remove_all(root);
  for (const char* run : {"a", "b"}) {
    const auto models = train_models(cfg, cfg.train_seed);
    emit_report(run_fixed_graph_ablation(cfg, models), root / run);
  }
  bool same = true;
  std::string detail;
  for (const char* f : {"records.csv", "records.json"}) {
    const auto a = file_bytes(root / "a" / f), b = file_bytes(root / "b" / f);
    const bool eq = !a.empty() && a == b;
    same = same && eq;
    detail += fmt("%s %zu bytes %s; ", f, a.size(), eq ? "identical" : "DIFFER");
  }
  fs::remove_all(root);
  return {same, detail + "train + ablation rerun"};
}

// Two-sided paired t-test of mse_post against mse_pre under identity gains.
Outcome null_intervention() {
  const auto& recs = intervention_records();
  bool pass = true;
  std::string detail;
  for (const char* model : {"cady", "dense"}) {
    std::vector<double> d;
    for (const auto& r : recs) {
      if (r.condition == "gain_v1_w1" && r.model == model) d.push_back(r.metrics.at("mse_post") - r.metrics.at("mse_pre"));
    }
    const double n = static_cast<double>(d.size());
    double mean = 0.0, ss = 0.0;
    for (double v : d) mean += v / n;
    for (double v : d) ss += (v - mean) * (v - mean);
    const double t = mean / std::sqrt(ss / (n - 1.0) / n);
    const double crit = boost::math::quantile(boost::math::complement(boost::math::students_t(n - 1.0), 0.025));
    pass = pass && std::abs(t) < crit;
    detail += fmt("%s t=%.3f (|t| < %.3f, n=%.0f); ", model, t, crit, n);
  }
  return {pass, detail + "identity gains: post vs pre MSE"};
}

Outcome mission_noise_ordering() {
  const auto cfg = ExperimentConfig::defaults(EnvKind::DiffDrive);
  const auto& models = diffdrive_models(cfg.train_seed);
  const auto fault = env::FaultConfig::gaussian_noise(0.1);
  std::map<std::string, std::size_t> successes;
  for (const Predictor& p : {Predictor::cady(models), Predictor::dense(models)}) {
    for (const std::uint64_t seed : cfg.seeds) {
      const auto env = make_environment(cfg);
      successes[p.name] += run_episode(cfg, *env, p, fault, {}, derive_seed(cfg.train_seed, 2, seed)).success;
    }
  }
  return {successes["cady"] >= successes["dense"],
          fmt("3-waypoint mission, noise variance 0.1, %zu seeds: success cady %zu vs dense %zu (cady >= dense)",
              cfg.seeds.size(), successes["cady"], successes["dense"])};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"C1 parameter count", parameter_count},
      {"C2 finite-difference gradients", gradient_check},
      {"C3a IG linear exactness", ig_linear_exactness},
      {"C3b IG completeness", ig_completeness},
      {"C4 mask enumeration", mask_enumeration},
      {"C5 causal recovery", causal_recovery},
      {"C6 oracle planners", oracle_planners},
      {"C7 MBRL improvement", mbrl_improvement},
      {"C8 robustness PD", robustness},
      {"C9 interventions", interventions},
      {"C10 sampling vs fixed graph", ablation},
      {"C11 deterministic rerun", rerun_identical},
      {"P1 null intervention", null_intervention},
      {"P2 mission noise ordering", mission_noise_ordering},
  };
  std::set<std::string> only;
  if (const char* sel = std::getenv("CADY_ACCEPTANCE")) {
    std::stringstream ss(sel);
    for (std::string tok; std::getline(ss, tok, ',');) only.insert(tok.starts_with("P") ? tok : "C" + tok);
  }
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    const std::string id = name.substr(0, name.find(' '));
    if (!only.empty() && !only.count(id) && !only.count(id.substr(0, id.find_first_of("ab")))) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !o.pass;
    std::printf("%s  %-32s %s [%.0fs]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
