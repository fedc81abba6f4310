#include "cady/autodiff/adam.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cady::ad {

AdamState::AdamState(std::span<const Tensor> params, AdamConfig cfg) : cfg_(cfg) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const Tensor& p : params) {
    m_.emplace_back(p.rows(), p.cols());
    v_.emplace_back(p.rows(), p.cols());
  }
}

void adam_step(std::span<Tensor> params, std::span<const Tensor> grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m_.size()) {
    throw std::invalid_argument("adam_step: parameter/gradient/state count mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].shape() != grads[i].shape() || params[i].shape() != state.m_[i].shape()) {
      throw std::invalid_argument("adam_step: shape mismatch for parameter " + std::to_string(i) +
                                  ": " + to_string(params[i].shape()) + " vs gradient " +
                                  to_string(grads[i].shape()));
    }
  }
  const AdamConfig& c = state.cfg_;
  ++state.step_;
  const double t = static_cast<double>(state.step_);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = params[i];
    Tensor& m = state.m_[i];
    Tensor& v = state.v_[i];
    const Tensor& g = grads[i];
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g[k];
      v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g[k] * g[k];
      const double mhat = m[k] / bc1;
      const double vhat = v[k] / bc2;
      p[k] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
    }
  }
}

}  // namespace cady::ad
