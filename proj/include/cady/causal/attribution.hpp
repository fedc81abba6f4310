#pragma once

// Integrated Gradients attribution of the decoder means to the model inputs,
// and its aggregation into raw edge scores.

#include <span>
#include <vector>

#include "cady/common.hpp"
#include "cady/model/model.hpp"

namespace cady::causal {

struct AttributionConfig {
  std::size_t riemann_steps = 64;
  std::size_t num_inputs = 256;
  /// Reference input in normalized space; empty means the zero vector.
  std::vector<double> null_input;

  void validate(std::size_t input_dim) const;
};

/// a_i = (x_i - x'_i) * mean_k d mu_j / d x_i at x' + ((k - 0.5) / m)(x - x'),
/// evaluated with the all-ones mask.
std::vector<double> integrated_gradients(const model::CadyModel& model, std::span<const double> x,
                                         const AttributionConfig& cfg, std::size_t output);

/// IG for every output at once; result is (input_dim x n) row-major.
std::vector<double> integrated_gradients_all(const model::CadyModel& model,
                                             std::span<const double> x,
                                             const AttributionConfig& cfg);

/// Mean |IG| over cfg.num_inputs rows of `inputs` (row-major, normalized,
/// rows x input_dim). When num_inputs >= rows every row is used once;
/// otherwise rows are drawn without replacement. Result is (input_dim x n).
std::vector<double> estimate_edge_scores(const model::CadyModel& model,
                                         std::span<const double> inputs, std::size_t rows,
                                         const AttributionConfig& cfg, Rng& rng);

}  // namespace cady::causal
