#include "cady/planning/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cady::planning {

namespace {

void check_sizes(std::size_t n, std::size_t p, std::span<const double> states,
                 std::span<const double> actions, std::size_t batch, std::span<double> next) {
  if (states.size() != n * batch || actions.size() != p * batch || next.size() != n * batch) {
    throw std::invalid_argument("BatchDynamics: buffer sizes do not match batch " + std::to_string(batch));
  }
}

}  // namespace

LearnedDynamics::LearnedDynamics(const model::CadyModel& model, causal::EdgeProbMatrix edge_probs,
                                 Propagation propagation)
    : model_(&model), edge_probs_(std::move(edge_probs)), propagation_(propagation) {
  const auto& spec = model.spec();
  if (edge_probs_.rows() != spec.input_dim() || edge_probs_.cols() != spec.state_dim) {
    throw std::invalid_argument("LearnedDynamics: edge probabilities do not match the model shape");
  }
  if (!model.normalizer().fitted()) throw std::logic_error("LearnedDynamics: normalizer not fitted");
  deterministic_graph_ = std::all_of(edge_probs_.values().begin(), edge_probs_.values().end(),
                                     [](double p) { return p == 0.0 || p == 1.0; });
}

void LearnedDynamics::set_fixed_mask(causal::CausalMask mask) {
  if (mask.rows() != edge_probs_.rows() || mask.cols() != edge_probs_.cols()) {
    throw std::invalid_argument("LearnedDynamics: fixed mask shape mismatch");
  }
  fixed_ = std::move(mask);
}

void LearnedDynamics::step(std::span<const double> states, std::span<const double> actions,
                           std::size_t batch, std::span<double> next, Rng& rng) {
  const auto& spec = model_->spec();
  const std::size_t n = spec.state_dim, p = spec.action_dim;
  check_sizes(n, p, states, actions, batch, next);
  const model::Normalizer& norm = model_->normalizer();

  input_.resize((n + p) * batch);
  for (std::size_t i = 0; i < n + p; ++i) {
    const double mu = norm.in_mean[i], sd = norm.in_std[i];
    const double* src = i < n ? states.data() + i * batch : actions.data() + (i - n) * batch;
    double* dst = input_.data() + i * batch;
    for (std::size_t k = 0; k < batch; ++k) dst[k] = (src[k] - mu) / sd;
  }

  masks_.clear();
  if (fixed_) {
    masks_.push_back(*fixed_);
  } else if (deterministic_graph_) {
    masks_.push_back(sample_mask(edge_probs_, rng));
  } else {
    masks_.reserve(batch);
    for (std::size_t k = 0; k < batch; ++k) masks_.push_back(sample_mask(edge_probs_, rng));
    draws_ += batch;
  }
  calls_ += batch;

  model_->forward_batch(input_, batch, masks_, mean_, logvar_);
  const bool sample = propagation_ == Propagation::SampleGaussian;
  for (std::size_t j = 0; j < n; ++j) {
    const double mu = norm.out_mean[j], sd = norm.out_std[j];
    for (std::size_t k = 0; k < batch; ++k) {
      double d = mean_[j * batch + k];
      if (sample) d += std::exp(0.5 * logvar_[j * batch + k]) * standard_normal(rng);
      next[j * batch + k] = states[j * batch + k] + d * sd + mu;
    }
  }
  for (std::size_t a : spec.angle_dims) {
    for (std::size_t k = 0; k < batch; ++k) next[a * batch + k] = wrap_angle(next[a * batch + k]);
  }
}

void CartpoleOracle::step(std::span<const double> states, std::span<const double> actions,
                          std::size_t batch, std::span<double> next, Rng&) {
  check_sizes(4, 1, states, actions, batch, next);
  for (std::size_t k = 0; k < batch; ++k) {
    const env::CartpoleState s{states[k], states[batch + k], states[2 * batch + k], states[3 * batch + k]};
    const auto r = env::cartpole_step(s, actions[k], params_);
    for (std::size_t j = 0; j < 4; ++j) next[j * batch + k] = r.state[j];
  }
}

void DiffDriveOracle::step(std::span<const double> states, std::span<const double> actions,
                           std::size_t batch, std::span<double> next, Rng&) {
  check_sizes(3, 2, states, actions, batch, next);
  for (std::size_t k = 0; k < batch; ++k) {
    const auto s = env::diffdrive_step({states[k], states[batch + k], states[2 * batch + k]}, actions[k],
                                       actions[batch + k], params_);
    for (std::size_t j = 0; j < 3; ++j) next[j * batch + k] = s[j];
  }
}

}  // namespace cady::planning
