#include "cady/training/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cady/autodiff/adam.hpp"
#include "cady/model/loss.hpp"

namespace cady::training {

using ad::Tensor;

void TrainConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (!(loss_delta_stop > 0.0)) throw std::invalid_argument("TrainConfig: loss_delta_stop must be > 0");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
}

namespace {

void check_compatible(const model::CadyModel& model, const TransitionDataset& data) {
  if (model.spec().state_dim != data.state_dim() || model.spec().action_dim != data.action_dim()) {
    throw std::invalid_argument("model and dataset dimensions differ");
  }
}

}  // namespace

TrainReport train_model(model::CadyModel& model, const causal::EdgeProbMatrix& edge_probs,
                        const TransitionDataset& data, const TrainConfig& cfg, Rng& rng) {
  cfg.validate();
  if (data.empty()) throw std::invalid_argument("train_model: empty dataset");
  check_compatible(model, data);
  const model::Normalizer& norm = model.normalizer();
  if (!norm.fitted()) throw std::logic_error("train_model: normalizer not fitted");
  const std::size_t n = data.state_dim(), dim = n + data.action_dim(), rows = data.size();
  if (edge_probs.rows() != dim || edge_probs.cols() != n) {
    throw std::invalid_argument("train_model: edge probabilities do not match the model shape");
  }

  // Normalize once; columns are gathered per batch.
  std::vector<double> x(rows * dim), y(rows * n);
  {
    const auto raw_x = data.inputs();
    const auto raw_y = data.deltas();
    for (std::size_t r = 0; r < rows; ++r) {
      norm.normalize_input(std::span(raw_x).subspan(r * dim, dim), std::span(x).subspan(r * dim, dim));
      norm.normalize_delta(std::span(raw_y).subspan(r * n, n), std::span(y).subspan(r * n, n));
    }
  }

  std::vector<Tensor>& params = model.parameters();
  ad::AdamState adam(params, ad::AdamConfig{cfg.learning_rate});
  std::vector<Tensor> grads(params.size());
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), 0);
  const bool deterministic_graph = std::all_of(edge_probs.values().begin(), edge_probs.values().end(),
                                               [](double p) { return p == 0.0 || p == 1.0; });

  TrainReport report;
  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < rows; start += cfg.batch_size) {
      const std::size_t b = std::min(cfg.batch_size, rows - start);
      Tensor xb(dim, b), yb(n, b);
      for (std::size_t k = 0; k < b; ++k) {
        const std::size_t r = order[start + k];
        for (std::size_t i = 0; i < dim; ++i) xb(i, k) = x[r * dim + i];
        for (std::size_t j = 0; j < n; ++j) yb(j, k) = y[r * n + j];
      }
      const causal::CausalMask mask = sample_mask(edge_probs, rng);
      if (!deterministic_graph) ++report.mask_draws;

      ad::Tape tape;
      const auto p = model.bind(tape);
      const auto out = model.forward(p, tape.constant(std::move(xb)), mask);
      const ad::Var loss = model::nll_loss(p, out, tape.constant(std::move(yb)));
      const double value = loss.value()[0];
      if (!std::isfinite(value)) {
        throw std::runtime_error("training diverged: non-finite loss at epoch " + std::to_string(epoch) +
                                 ", batch " + std::to_string(batches));
      }
      const ad::Gradients g = tape.backward(loss, Tensor::scalar(1.0));
      for (std::size_t i = 0; i < params.size(); ++i) grads[i] = g[p.vars[i]];
      ad::adam_step(params, grads, adam);
      loss_sum += value;
      ++batches;
    }
    report.batches += batches;
    report.epoch_losses.push_back(loss_sum / static_cast<double>(batches));
    const std::size_t e = report.epoch_losses.size();
    if (e >= 2 && std::abs(report.epoch_losses[e - 1] - report.epoch_losses[e - 2]) < cfg.loss_delta_stop) {
      report.early_stopped = true;
      break;
    }
  }
  return report;
}

model::CadyModel train_contribution_model(const TransitionDataset& data, const model::ModelSpec& spec,
                                          const TrainConfig& cfg, Rng& rng, TrainReport* report) {
  return train_dynamics_model(data, spec, causal::EdgeProbMatrix::ones(spec.input_dim(), spec.state_dim), cfg,
                              rng, report);
}

model::CadyModel train_dynamics_model(const TransitionDataset& data, const model::ModelSpec& spec,
                                      const causal::EdgeProbMatrix& edge_probs, const TrainConfig& cfg,
                                      Rng& rng, TrainReport* report) {
  if (data.empty()) throw std::invalid_argument("training: empty dataset");
  model::CadyModel m = model::CadyModel::build(spec, rng);
  check_compatible(m, data);
  m.normalizer() = fit_normalizer(data);
  TrainReport r = train_model(m, edge_probs, data, cfg, rng);
  if (report) *report = std::move(r);
  return m;
}

causal::EdgeProbMatrix estimate_distribution(const model::CadyModel& contribution,
                                             const TransitionDataset& data,
                                             const causal::AttributionConfig& cfg, double rho_min,
                                             const causal::Smoothing& smoothing, Rng& rng) {
  if (data.empty()) throw std::invalid_argument("estimate_distribution: empty dataset");
  check_compatible(contribution, data);
  const std::size_t dim = data.state_dim() + data.action_dim();
  const auto raw = data.inputs();
  std::vector<double> x(raw.size());
  for (std::size_t r = 0; r < data.size(); ++r) {
    contribution.normalizer().normalize_input(std::span(raw).subspan(r * dim, dim), std::span(x).subspan(r * dim, dim));
  }
  const auto scores = causal::estimate_edge_scores(contribution, x, data.size(), cfg, rng);
  return causal::normalize_probabilities(dim, data.state_dim(), scores, smoothing, rho_min);
}

TrainReport finetune(model::CadyModel& model, const causal::EdgeProbMatrix& edge_probs,
                     const TransitionDataset& window, const TrainConfig& cfg, Rng& rng) {
  if (window.empty()) throw std::invalid_argument("finetune: empty window");
  if (cfg.max_epochs == 0) return {};
  return train_model(model, edge_probs, window, cfg, rng);
}

MseReport one_step_mse(const model::CadyModel& model, const causal::EdgeProbMatrix& edge_probs,
                       const TransitionDataset& data, Rng& rng, std::size_t expectation_draws) {
  if (data.empty()) throw std::invalid_argument("one_step_mse: empty split");
  check_compatible(model, data);
  if (expectation_draws < 1) throw std::invalid_argument("one_step_mse: need at least one draw");
  const model::Normalizer& norm = model.normalizer();
  if (!norm.fitted()) throw std::logic_error("one_step_mse: normalizer not fitted");
  const std::size_t n = data.state_dim(), dim = n + data.action_dim(), rows = data.size();
  const auto& angles = model.spec().angle_dims;

  std::vector<double> x(dim * rows);  // feature-major
  {
    std::vector<double> raw(dim), z(dim);
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy(data.state(r).begin(), data.state(r).end(), raw.begin());
      std::copy(data.action(r).begin(), data.action(r).end(), raw.begin() + static_cast<std::ptrdiff_t>(n));
      norm.normalize_input(raw, z);
      for (std::size_t i = 0; i < dim; ++i) x[i * rows + r] = z[i];
    }
  }

  // Returns per-dimension squared-error sums for one mask per row.
  std::vector<double> mean, logvar;
  auto pass = [&]() {
    model::MaskBatch masks;
    masks.reserve(rows);
    for (std::size_t r = 0; r < rows; ++r) masks.push_back(sample_mask(edge_probs, rng));
    model.forward_batch(x, rows, masks, mean, logvar);
    std::vector<double> se(n, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < n; ++j) {
        const double pred = data.state(r)[j] + mean[j * rows + r] * norm.out_std[j] + norm.out_mean[j];
        double err = pred - data.next_state(r)[j];
        if (std::find(angles.begin(), angles.end(), j) != angles.end()) err = wrap_angle(err);
        se[j] += err * err;
      }
    }
    return se;
  };

  MseReport rep;
  rep.per_dim = pass();
  rep.expected_per_dim = rep.per_dim;
  for (std::size_t d = 1; d < expectation_draws; ++d) {
    const auto se = pass();
    for (std::size_t j = 0; j < n; ++j) rep.expected_per_dim[j] += se[j];
  }
  for (std::size_t j = 0; j < n; ++j) {
    rep.per_dim[j] /= static_cast<double>(rows);
    rep.expected_per_dim[j] /= static_cast<double>(rows * expectation_draws);
  }
  rep.aggregate = std::accumulate(rep.per_dim.begin(), rep.per_dim.end(), 0.0) / static_cast<double>(n);
  rep.expected_aggregate =
      std::accumulate(rep.expected_per_dim.begin(), rep.expected_per_dim.end(), 0.0) / static_cast<double>(n);
  return rep;
}

}  // namespace cady::training
