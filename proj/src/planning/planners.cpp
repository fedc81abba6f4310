#include "cady/planning/planners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace cady::planning {

namespace {

std::vector<double> midpoint_sequence(const ActionBounds& b, std::size_t horizon) {
  std::vector<double> seq(horizon * b.dim());
  for (std::size_t t = 0; t < horizon; ++t)
    for (std::size_t a = 0; a < b.dim(); ++a) seq[t * b.dim() + a] = 0.5 * (b.low[a] + b.high[a]);
  return seq;
}

// Drops the first `steps` steps and pads the tail with the midpoint action.
void shift_sequence(std::vector<double>& seq, std::size_t steps, const ActionBounds& b) {
  const std::size_t p = b.dim(), horizon = seq.size() / p;
  steps = std::min(steps, horizon);
  std::copy(seq.begin() + static_cast<std::ptrdiff_t>(steps * p), seq.end(), seq.begin());
  for (std::size_t t = horizon - steps; t < horizon; ++t)
    for (std::size_t a = 0; a < p; ++a) seq[t * p + a] = 0.5 * (b.low[a] + b.high[a]);
}

double truncated_normal(Rng& rng) {
  for (;;) {
    const double z = standard_normal(rng);
    if (z >= -2.0 && z <= 2.0) return z;
  }
}

}  // namespace

void ActionBounds::validate() const {
  if (low.empty() || low.size() != high.size()) throw std::invalid_argument("ActionBounds: low/high size mismatch");
  for (std::size_t a = 0; a < low.size(); ++a) {
    if (!(low[a] <= high[a])) throw std::invalid_argument("ActionBounds: low exceeds high");
  }
}

RandomPlanner::RandomPlanner(ActionBounds bounds) : bounds_(std::move(bounds)) { bounds_.validate(); }

std::vector<double> RandomPlanner::act(RolloutEvaluator&, std::span<const double>, Rng& rng) {
  std::vector<double> a(bounds_.dim());
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = bounds_.low[i] + (bounds_.high[i] - bounds_.low[i]) * uniform01(rng);
  }
  return a;
}

// ---------------------------------------------------------------- CEM

std::size_t CemConfig::elite_count() const {
  return static_cast<std::size_t>(std::ceil(elite_ratio * static_cast<double>(population) - 1e-9));
}

void CemConfig::validate() const {
  if (horizon < 1) throw std::invalid_argument("CemConfig: horizon must be >= 1");
  if (!(elite_ratio > 0.0 && elite_ratio <= 1.0)) throw std::invalid_argument("CemConfig: elite_ratio must lie in (0, 1]");
  if (elite_count() < 2) throw std::invalid_argument("CemConfig: need at least 2 elites");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("CemConfig: alpha must lie in [0, 1)");
  if (iterations < 1) throw std::invalid_argument("CemConfig: iterations must be >= 1");
  if (replan_frequency < 1 || replan_frequency > horizon) {
    throw std::invalid_argument("CemConfig: replan_frequency must lie in [1, horizon]");
  }
}

CemPlanner::CemPlanner(CemConfig cfg, ActionBounds bounds) : cfg_(cfg), bounds_(std::move(bounds)) {
  cfg_.validate();
  bounds_.validate();
  reset();
}

void CemPlanner::reset() {
  mean_ = midpoint_sequence(bounds_, cfg_.horizon);
  plan_.clear();
  plan_cursor_ = 0;
}

std::vector<double> CemPlanner::plan(RolloutEvaluator& evaluator, std::span<const double> state, Rng& rng) {
  const std::size_t p = bounds_.dim(), h = cfg_.horizon, len = h * p;
  const std::size_t pop = cfg_.population, elites = cfg_.elite_count();
  if (evaluator.action_dim() != p) throw std::invalid_argument("CemPlanner: evaluator action dimension mismatch");

  std::vector<double> var(len);
  for (std::size_t i = 0; i < len; ++i) {
    const double range = bounds_.high[i % p] - bounds_.low[i % p];
    var[i] = range * range / 16.0;
  }
  std::vector<double> samples(pop * len), scores(pop), std_dev(len);
  std::vector<std::size_t> order(pop);
  std::vector<double> best_seq;
  double best_score = -std::numeric_limits<double>::infinity();
  best_scores_.clear();

  for (std::size_t iter = 0; iter < cfg_.iterations; ++iter) {
    for (std::size_t i = 0; i < len; ++i) {
      const double lo = mean_[i] - bounds_.low[i % p], hi = bounds_.high[i % p] - mean_[i];
      std_dev[i] = std::sqrt(std::max(0.0, std::min({lo * lo / 4.0, hi * hi / 4.0, var[i]})));
    }
    for (std::size_t k = 0; k < pop; ++k) {
      double* s = samples.data() + k * len;
      for (std::size_t i = 0; i < len; ++i) {
        s[i] = std::clamp(mean_[i] + std_dev[i] * truncated_normal(rng), bounds_.low[i % p], bounds_.high[i % p]);
      }
    }
    // The incumbent competes again so the best elite never gets worse on
    // deterministic objectives.
    if (!best_seq.empty()) std::copy(best_seq.begin(), best_seq.end(), samples.begin());

    evaluator.evaluate(state, samples, pop, h, scores, rng);
    for (double& s : scores) {
      if (std::isnan(s)) s = -std::numeric_limits<double>::infinity();
    }
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    if (scores[order[0]] >= best_score || best_seq.empty()) {
      best_score = scores[order[0]];
      best_seq.assign(samples.begin() + static_cast<std::ptrdiff_t>(order[0] * len),
                      samples.begin() + static_cast<std::ptrdiff_t>((order[0] + 1) * len));
    }
    best_scores_.push_back(scores[order[0]]);

    for (std::size_t i = 0; i < len; ++i) {
      double m = 0.0;
      for (std::size_t e = 0; e < elites; ++e) m += samples[order[e] * len + i];
      m /= static_cast<double>(elites);
      double v = 0.0;
      for (std::size_t e = 0; e < elites; ++e) {
        const double d = samples[order[e] * len + i] - m;
        v += d * d;
      }
      v /= static_cast<double>(elites);
      mean_[i] = std::clamp(cem_blend(mean_[i], m, cfg_.alpha), bounds_.low[i % p], bounds_.high[i % p]);
      var[i] = cem_blend(var[i], v, cfg_.alpha);
    }
  }
  return mean_;
}

std::vector<double> CemPlanner::act(RolloutEvaluator& evaluator, std::span<const double> observation, Rng& rng) {
  const std::size_t p = bounds_.dim();
  if (plan_.empty() || plan_cursor_ >= cfg_.replan_frequency) {
    plan_ = plan(evaluator, observation, rng);
    plan_cursor_ = 0;
    shift_sequence(mean_, cfg_.replan_frequency, bounds_);
  }
  std::vector<double> a(plan_.begin() + static_cast<std::ptrdiff_t>(plan_cursor_ * p),
                        plan_.begin() + static_cast<std::ptrdiff_t>((plan_cursor_ + 1) * p));
  ++plan_cursor_;
  return a;
}

// ---------------------------------------------------------------- MPPI

void MppiConfig::validate() const {
  if (horizon < 1) throw std::invalid_argument("MppiConfig: horizon must be >= 1");
  if (num_samples < 1) throw std::invalid_argument("MppiConfig: num_samples must be >= 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("MppiConfig: sigma must be > 0");
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("MppiConfig: beta must lie in [0, 1]");
  if (!(gamma > 0.0)) throw std::invalid_argument("MppiConfig: gamma must be > 0");
  if (iterations < 1) throw std::invalid_argument("MppiConfig: iterations must be >= 1");
}

std::vector<double> mppi_weights(std::span<const double> scores, double gamma) {
  double best = -std::numeric_limits<double>::infinity();
  for (double s : scores) {
    if (std::isfinite(s)) best = std::max(best, s);
  }
  if (!std::isfinite(best)) {
    throw std::runtime_error("mppi: all " + std::to_string(scores.size()) +
                             " rollout scores are non-finite; the dynamics model diverged");
  }
  std::vector<double> w(scores.size());
  double total = 0.0;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    w[k] = std::isfinite(scores[k]) ? std::exp(gamma * (scores[k] - best)) : 0.0;
    total += w[k];
  }
  for (double& v : w) v /= total;
  return w;
}

void filter_noise(std::span<double> noise, std::size_t horizon, std::size_t dim, double beta) {
  for (std::size_t a = 0; a < dim; ++a) {
    double prev = 0.0;
    for (std::size_t t = 0; t < horizon; ++t) {
      double& v = noise[t * dim + a];
      v = beta * v + (1.0 - beta) * prev;
      prev = v;
    }
  }
}

MppiPlanner::MppiPlanner(MppiConfig cfg, ActionBounds bounds) : cfg_(cfg), bounds_(std::move(bounds)) {
  cfg_.validate();
  bounds_.validate();
  reset();
}

void MppiPlanner::reset() { nominal_ = midpoint_sequence(bounds_, cfg_.horizon); }

std::vector<double> MppiPlanner::act(RolloutEvaluator& evaluator, std::span<const double> observation, Rng& rng) {
  const std::size_t p = bounds_.dim(), h = cfg_.horizon, len = h * p, k_count = cfg_.num_samples;
  if (evaluator.action_dim() != p) throw std::invalid_argument("MppiPlanner: evaluator action dimension mismatch");
  const double sd = std::sqrt(cfg_.sigma);
  std::vector<double> candidates(k_count * len), scores(k_count);

  for (std::size_t iter = 0; iter < cfg_.iterations; ++iter) {
    for (std::size_t k = 0; k < k_count; ++k) {
      const std::span<double> c(candidates.data() + k * len, len);
      for (double& v : c) v = sd * standard_normal(rng);
      filter_noise(c, h, p, cfg_.beta);
      for (std::size_t i = 0; i < len; ++i) {
        c[i] = std::clamp(nominal_[i] + c[i], bounds_.low[i % p], bounds_.high[i % p]);
      }
    }
    evaluator.evaluate(observation, candidates, k_count, h, scores, rng);
    weights_ = mppi_weights(scores, cfg_.gamma);
    std::fill(nominal_.begin(), nominal_.end(), 0.0);
    for (std::size_t k = 0; k < k_count; ++k) {
      if (weights_[k] == 0.0) continue;
      for (std::size_t i = 0; i < len; ++i) nominal_[i] += weights_[k] * candidates[k * len + i];
    }
    for (std::size_t i = 0; i < len; ++i) {
      nominal_[i] = std::clamp(nominal_[i], bounds_.low[i % p], bounds_.high[i % p]);
    }
  }

  std::vector<double> action(nominal_.begin(), nominal_.begin() + static_cast<std::ptrdiff_t>(p));
  // One-step shift; the last step repeats.
  std::copy(nominal_.begin() + static_cast<std::ptrdiff_t>(p), nominal_.end(), nominal_.begin());
  return action;
}

}  // namespace cady::planning
