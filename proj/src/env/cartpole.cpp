#include "cady/env/cartpole.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cady::env {

void clamp_action(std::span<double> action, std::span<const double> low, std::span<const double> high) {
  if (action.size() != low.size() || action.size() != high.size()) {
    throw std::invalid_argument("clamp_action: action has " + std::to_string(action.size()) +
                                " entries, bounds have " + std::to_string(low.size()));
  }
  for (std::size_t i = 0; i < action.size(); ++i) action[i] = std::clamp(action[i], low[i], high[i]);
}

void CartpoleParams::validate() const {
  if (!(gravity > 0 && cart_mass > 0 && pole_mass > 0 && half_length > 0 && force_scale > 0 &&
        tau > 0 && position_limit > 0 && angle_limit > 0 && action_limit > 0)) {
    throw std::invalid_argument("CartpoleParams: all constants must be positive");
  }
}

bool cartpole_out_of_bounds(double x, double theta, const CartpoleParams& p) {
  return x < -p.position_limit || x > p.position_limit || theta < -p.angle_limit || theta > p.angle_limit;
}

CartpoleStep cartpole_step(const CartpoleState& s, double action, const CartpoleParams& p) {
  const auto [x, theta, x_dot, theta_dot] = s;
  const double force = p.force_scale * std::clamp(action, -p.action_limit, p.action_limit);
  const double total_mass = p.cart_mass + p.pole_mass;
  const double pole_ml = p.pole_mass * p.half_length;
  const double c = std::cos(theta), sn = std::sin(theta);

  const double temp = (force + pole_ml * theta_dot * theta_dot * sn) / total_mass;
  const double theta_acc =
      (p.gravity * sn - c * temp) / (p.half_length * (4.0 / 3.0 - p.pole_mass * c * c / total_mass));
  const double x_acc = temp - pole_ml * theta_acc * c / total_mass;

  CartpoleStep out;
  out.state = {x + p.tau * x_dot, theta + p.tau * theta_dot, x_dot + p.tau * x_acc,
               theta_dot + p.tau * theta_acc};
  out.failed = cartpole_out_of_bounds(out.state[0], out.state[1], p);
  out.reward = out.failed ? 0.0 : 1.0;
  return out;
}

double cartpole_energy(const CartpoleState& s, const CartpoleParams& p) {
  const auto [x, theta, x_dot, theta_dot] = s;
  (void)x;
  const double m = p.pole_mass, l = p.half_length;
  return 0.5 * (p.cart_mass + m) * x_dot * x_dot + m * l * x_dot * theta_dot * std::cos(theta) +
         0.5 * (4.0 / 3.0) * m * l * l * theta_dot * theta_dot + m * p.gravity * l * std::cos(theta);
}

CartpoleEnv::CartpoleEnv(CartpoleParams params)
    : params_(params), low_{-params.action_limit}, high_{params.action_limit}, state_(4, 0.0) {
  params_.validate();
}

std::vector<std::string> CartpoleEnv::state_names() const { return {"x", "theta", "x_dot", "theta_dot"}; }

void CartpoleEnv::reset(Rng& rng) {
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  for (double& v : state_) v = u(rng);
  steps_ = 0;
}

void CartpoleEnv::set_state(const CartpoleState& s) {
  state_.assign(s.begin(), s.end());
  steps_ = 0;
}

StepOutcome CartpoleEnv::step(std::span<const double> action) {
  if (action.size() != 1) throw std::invalid_argument("CartpoleEnv: expected 1 action, got " + std::to_string(action.size()));
  const CartpoleStep r = cartpole_step({state_[0], state_[1], state_[2], state_[3]}, action[0], params_);
  state_.assign(r.state.begin(), r.state.end());
  ++steps_;
  return {r.reward, r.failed || steps_ >= params_.episode_length};
}

}  // namespace cady::env
