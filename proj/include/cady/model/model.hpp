#pragma once

// Probabilistic encoder / multi-decoder dynamics model.
//
//   z   = W_enc x + b_enc                      (latent, same width as x)
//   z_j = z (.) M[:, j]                         (per-output causal mask)
//   (mu_j, raw_j) = decoder_j(z_j)              (hidden layers + 2-unit head)
//   logvar_j = bound(raw_j, min_lv_j, max_lv_j)
//
// Inputs are normalized [s; a]; outputs are normalized state deltas.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cady/autodiff/tape.hpp"
#include "cady/causal/edge_probs.hpp"
#include "cady/common.hpp"
#include "cady/model/normalizer.hpp"

namespace cady::model {

enum class Activation { Tanh, Softplus, Identity };

std::string activation_name(Activation a);
Activation parse_activation(const std::string& name);

struct ModelSpec {
  std::size_t state_dim = 0;   // n
  std::size_t action_dim = 0;  // p
  std::size_t hidden_size = 3;
  std::size_t hidden_layers = 3;
  Activation activation = Activation::Tanh;
  /// State dimensions holding angles; their deltas and next states wrap to (-pi, pi].
  std::vector<std::size_t> angle_dims;

  std::size_t input_dim() const { return state_dim + action_dim; }
  std::size_t latent_dim() const { return state_dim + action_dim; }
  void validate() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// (n+p)(n+p+1) + n [ (n+p+1)h + (L-1)(h+1)h + 2(h+1) ].
std::size_t closed_form_parameter_count(const ModelSpec& spec);

struct GaussianPrediction {
  std::vector<double> mean;    // normalized delta units
  std::vector<double> logvar;
};

struct LogvarBounds {
  double min_lv;
  double max_lv;
};

/// lv = max - softplus(max - raw); lv = min + softplus(lv - min).
double bound_logvar(double raw, LogvarBounds b);
std::vector<double> bound_logvar(std::span<const double> raw, std::span<const LogvarBounds> bounds);

inline constexpr LogvarBounds kInitialLogvarBounds{-10.0, 0.5};
inline constexpr double kBoundPenalty = 0.01;

/// Per-column masks for a batch: mask k is masks[k].
using MaskBatch = std::vector<causal::CausalMask>;

class CadyModel {
 public:
  /// Weights and biases ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  static CadyModel build(const ModelSpec& spec, Rng& rng);
  /// Reassembles a model from stored tensors; shapes must match those of build().
  static CadyModel from_parts(const ModelSpec& spec, std::vector<ad::Tensor> params,
                              Normalizer normalizer);

  const ModelSpec& spec() const { return spec_; }

  /// All trainable tensors: network weights first, then min_lv and max_lv (n x 1 each).
  std::vector<ad::Tensor>& parameters() { return params_; }
  const std::vector<ad::Tensor>& parameters() const { return params_; }
  const std::vector<std::string>& parameter_names() const { return names_; }
  /// Network weights and biases (excludes the two log-variance bound vectors).
  std::size_t parameter_count() const;
  std::size_t network_tensor_count() const { return params_.size() - 2; }

  LogvarBounds logvar_bounds(std::size_t j) const;

  Normalizer& normalizer() { return normalizer_; }
  const Normalizer& normalizer() const { return normalizer_; }

  // ---- tape path (training, attribution) ----

  struct TapeParams {
    std::vector<ad::Var> vars;  // same order as parameters()
  };
  struct TapeOutputs {
    std::vector<ad::Var> mean;    // n entries, each (1 x batch)
    std::vector<ad::Var> logvar;  // n entries, each (1 x batch)
  };

  /// Records every parameter as a differentiable leaf.
  TapeParams bind(ad::Tape& tape) const;
  ad::Var encode(const TapeParams& p, ad::Var x) const;
  /// Decoders on latent z (latent x batch); one mask for the whole batch.
  TapeOutputs decode(const TapeParams& p, ad::Var z, const causal::CausalMask& mask) const;
  TapeOutputs forward(const TapeParams& p, ad::Var x, const causal::CausalMask& mask) const;

  // ---- tape-free path (planning, evaluation) ----

  /// x is a normalized input vector.
  GaussianPrediction forward(std::span<const double> x, const causal::CausalMask& mask) const;

  /// Batched inference on feature-major x (input_dim x batch). masks.size() must
  /// be 1 (shared) or batch. Outputs mean/logvar are (n x batch).
  void forward_batch(std::span<const double> x, std::size_t batch, const MaskBatch& masks,
                     std::vector<double>& mean, std::vector<double>& logvar) const;

 private:
  std::size_t enc_w() const { return 0; }
  std::size_t dec_base(std::size_t j) const { return 2 + j * (2 * spec_.hidden_layers + 2); }
  std::size_t min_lv_index() const { return params_.size() - 2; }
  std::size_t max_lv_index() const { return params_.size() - 1; }
  ad::Var activate(ad::Var v) const;

  ModelSpec spec_;
  std::vector<ad::Tensor> params_;
  std::vector<std::string> names_;
  Normalizer normalizer_;
};

/// Normalize [s; a], run the model, sample delta ~ N(mu, exp(logvar)) (or take mu
/// when sample == false), denormalize and return s + delta.
std::vector<double> predict_next_state(const CadyModel& model, std::span<const double> state,
                                       std::span<const double> action,
                                       const causal::CausalMask& mask, Rng& rng,
                                       bool sample = true);

}  // namespace cady::model
