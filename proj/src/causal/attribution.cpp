#include "cady/causal/attribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cady::causal {

using ad::Tensor;

namespace {

constexpr std::size_t kPointsPerTape = 32;

std::vector<double> reference(const AttributionConfig& cfg, std::size_t dim) {
  return cfg.null_input.empty() ? std::vector<double>(dim, 0.0) : cfg.null_input;
}

// IG for `count` points (row-major in `points`) on one tape. Adds
// weight * f(a_ij) into acc (input_dim x n) where f is identity or abs.
void accumulate_ig(const model::CadyModel& model, std::span<const double> points, std::size_t count,
                   const AttributionConfig& cfg, const std::vector<double>& xref, bool absolute,
                   double weight, std::vector<double>& acc) {
  const std::size_t dim = model.spec().input_dim(), n = model.spec().state_dim;
  const std::size_t m = cfg.riemann_steps, cols = count * m;
  Tensor path(dim, cols);
  for (std::size_t p = 0; p < count; ++p) {
    for (std::size_t k = 0; k < m; ++k) {
      const double alpha = (static_cast<double>(k) + 0.5) / static_cast<double>(m);
      for (std::size_t i = 0; i < dim; ++i) {
        const double x = points[p * dim + i];
        path(i, p * m + k) = xref[i] + alpha * (x - xref[i]);
      }
    }
  }
  ad::Tape tape;
  const auto params = model.bind(tape);
  const ad::Var xv = tape.input(std::move(path));
  const auto out = model.forward(params, xv, CausalMask::ones(dim, n));
  const Tensor seed(1, cols, 1.0);
  for (std::size_t j = 0; j < n; ++j) {
    const auto grads = tape.backward(out.mean[j], seed);
    const Tensor& g = grads[xv];
    for (std::size_t p = 0; p < count; ++p) {
      for (std::size_t i = 0; i < dim; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < m; ++k) s += g(i, p * m + k);
        const double a = (points[p * dim + i] - xref[i]) * s / static_cast<double>(m);
        acc[i * n + j] += weight * (absolute ? std::abs(a) : a);
      }
    }
  }
}

}  // namespace

void AttributionConfig::validate(std::size_t input_dim) const {
  if (riemann_steps < 8) throw std::invalid_argument("AttributionConfig: riemann_steps must be >= 8");
  if (num_inputs < 1) throw std::invalid_argument("AttributionConfig: num_inputs must be >= 1");
  if (!null_input.empty() && null_input.size() != input_dim) {
    throw std::invalid_argument("AttributionConfig: null input length mismatch");
  }
}

std::vector<double> integrated_gradients_all(const model::CadyModel& model,
                                             std::span<const double> x,
                                             const AttributionConfig& cfg) {
  const std::size_t dim = model.spec().input_dim();
  cfg.validate(dim);
  if (x.size() != dim) throw std::invalid_argument("integrated_gradients: input length mismatch");
  std::vector<double> acc(dim * model.spec().state_dim, 0.0);
  accumulate_ig(model, x, 1, cfg, reference(cfg, dim), false, 1.0, acc);
  return acc;
}

std::vector<double> integrated_gradients(const model::CadyModel& model, std::span<const double> x,
                                         const AttributionConfig& cfg, std::size_t output) {
  const std::size_t n = model.spec().state_dim;
  if (output >= n) {
    throw std::out_of_range("integrated_gradients: output " + std::to_string(output) +
                            " out of range for " + std::to_string(n) + " outputs");
  }
  const auto all = integrated_gradients_all(model, x, cfg);
  std::vector<double> a(model.spec().input_dim());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = all[i * n + output];
  return a;
}

std::vector<double> estimate_edge_scores(const model::CadyModel& model,
                                         std::span<const double> inputs, std::size_t rows,
                                         const AttributionConfig& cfg, Rng& rng) {
  const std::size_t dim = model.spec().input_dim(), n = model.spec().state_dim;
  cfg.validate(dim);
  if (rows == 0) throw std::invalid_argument("estimate_edge_scores: empty dataset");
  if (inputs.size() != rows * dim) throw std::invalid_argument("estimate_edge_scores: input size mismatch");

  std::vector<std::size_t> chosen(rows);
  std::iota(chosen.begin(), chosen.end(), 0);
  if (cfg.num_inputs < rows) {
    // Partial Fisher-Yates: the first num_inputs entries are a uniform sample.
    for (std::size_t k = 0; k < cfg.num_inputs; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, rows - 1);
      std::swap(chosen[k], chosen[pick(rng)]);
    }
    chosen.resize(cfg.num_inputs);
    std::sort(chosen.begin(), chosen.end());
  }

  const std::vector<double> xref = reference(cfg, dim);
  const double weight = 1.0 / static_cast<double>(chosen.size());
  std::vector<double> scores(dim * n, 0.0);
  std::vector<double> chunk;
  for (std::size_t start = 0; start < chosen.size(); start += kPointsPerTape) {
    const std::size_t count = std::min(kPointsPerTape, chosen.size() - start);
    chunk.assign(count * dim, 0.0);
    for (std::size_t p = 0; p < count; ++p) {
      std::copy_n(inputs.begin() + static_cast<std::ptrdiff_t>(chosen[start + p] * dim), dim,
                  chunk.begin() + static_cast<std::ptrdiff_t>(p * dim));
    }
    accumulate_ig(model, chunk, count, cfg, xref, true, weight, scores);
  }
  return scores;
}

}  // namespace cady::causal
