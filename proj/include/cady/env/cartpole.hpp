#pragma once

#include <array>
#include <numbers>

#include "cady/env/environment.hpp"

namespace cady::env {

struct CartpoleParams {
  double gravity = 9.8;
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double half_length = 0.5;
  double force_scale = 10.0;
  double tau = 0.02;
  double position_limit = 2.4;
  double angle_limit = 12.0 * std::numbers::pi / 180.0;
  double action_limit = 3.0;
  std::size_t episode_length = 200;

  void validate() const;
};

/// State order [x, theta, x_dot, theta_dot].
using CartpoleState = std::array<double, 4>;

struct CartpoleStep {
  CartpoleState state;
  double reward;
  /// Pole or cart left the allowed region (not the step cap).
  bool failed;
};

/// One explicit-Euler step of the classic cart-pole equations. The reward is
/// 1 for a surviving step and 0 for the step that fails.
CartpoleStep cartpole_step(const CartpoleState& s, double action, const CartpoleParams& p);

bool cartpole_out_of_bounds(double x, double theta, const CartpoleParams& p);

/// Total mechanical energy with the pole as a uniform rod about its pivot.
double cartpole_energy(const CartpoleState& s, const CartpoleParams& p);

class CartpoleEnv final : public Environment {
 public:
  explicit CartpoleEnv(CartpoleParams params = {});

  std::string name() const override { return "cartpole"; }
  std::size_t state_dim() const override { return 4; }
  std::size_t action_dim() const override { return 1; }
  const std::vector<double>& action_low() const override { return low_; }
  const std::vector<double>& action_high() const override { return high_; }
  std::vector<std::string> state_names() const override;
  std::vector<std::string> action_names() const override { return {"force"}; }

  /// Each state entry ~ U(-0.05, 0.05).
  void reset(Rng& rng) override;
  void set_state(const CartpoleState& s);
  const std::vector<double>& state() const override { return state_; }
  StepOutcome step(std::span<const double> action) override;
  std::size_t max_steps() const override { return params_.episode_length; }
  std::size_t steps_taken() const override { return steps_; }
  const CartpoleParams& params() const { return params_; }

 private:
  CartpoleParams params_;
  std::vector<double> low_, high_;
  std::vector<double> state_;
  std::size_t steps_ = 0;
};

}  // namespace cady::env
