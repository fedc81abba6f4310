#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cady/autodiff/tensor.hpp"

namespace cady::ad {

struct AdamConfig {
  double lr = 3e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Moment accumulators shaped like the parameters they track.
class AdamState {
 public:
  AdamState(std::span<const Tensor> params, AdamConfig cfg = {});

  const AdamConfig& config() const { return cfg_; }
  std::uint64_t step() const { return step_; }
  const std::vector<Tensor>& first_moment() const { return m_; }
  const std::vector<Tensor>& second_moment() const { return v_; }

 private:
  friend void adam_step(std::span<Tensor>, std::span<const Tensor>, AdamState&);

  AdamConfig cfg_;
  std::uint64_t step_ = 0;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
};

/// One bias-corrected Adam update applied in place.
void adam_step(std::span<Tensor> params, std::span<const Tensor> grads, AdamState& state);

}  // namespace cady::ad
