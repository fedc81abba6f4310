#include "cady/env/diffdrive.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cady::env {

void DiffDriveParams::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("DiffDriveParams: dt must be positive");
  if (!(v_min <= v_max) || !(omega_min <= omega_max)) {
    throw std::invalid_argument("DiffDriveParams: control limits are inverted");
  }
}

DiffDriveState diffdrive_step(const DiffDriveState& s, double v, double omega, const DiffDriveParams& p) {
  v = std::clamp(v, p.v_min, p.v_max);
  omega = std::clamp(omega, p.omega_min, p.omega_max);
  // Skip the wrap when not turning so theta is preserved bit-exactly.
  return {s[0] + v * std::cos(s[2]) * p.dt, s[1] + v * std::sin(s[2]) * p.dt,
          omega == 0.0 ? s[2] : wrap_angle(s[2] + omega * p.dt)};
}

void Mission::validate() const {
  if (waypoints.empty()) throw std::invalid_argument("Mission: needs at least one waypoint");
  if (!(arrival_radius > 0.0)) throw std::invalid_argument("Mission: arrival radius must be positive");
  if (!(time_limit > 0.0)) throw std::invalid_argument("Mission: time limit must be positive");
}

double mission_cost(std::span<const double> state, const Mission& mission, std::size_t progress) {
  if (progress >= mission.waypoints.size()) {
    throw std::out_of_range("mission_cost: progress index " + std::to_string(progress) +
                            " past the last waypoint");
  }
  const Waypoint& w = mission.waypoints[progress];
  return std::hypot(state[0] - w.x, state[1] - w.y);
}

DiffDriveEnv::DiffDriveEnv(Mission mission, DiffDriveParams params)
    : mission_(std::move(mission)),
      params_(params),
      low_{params.v_min, params.omega_min},
      high_{params.v_max, params.omega_max},
      state_(3, 0.0) {
  mission_.validate();
  params_.validate();
  Rng unused(0);
  reset(unused);
}

std::size_t DiffDriveEnv::max_steps() const {
  return static_cast<std::size_t>(std::floor(mission_.time_limit / params_.dt + 1e-9));
}

void DiffDriveEnv::reset(Rng&) {
  state_.assign(mission_.start.begin(), mission_.start.end());
  steps_ = 0;
  progress_ = 0;
  distance_ = 0.0;
  advance_progress();
}

void DiffDriveEnv::advance_progress() {
  while (progress_ < mission_.waypoints.size() &&
         mission_cost(state_, mission_, progress_) <= mission_.arrival_radius) {
    ++progress_;
  }
}

StepOutcome DiffDriveEnv::step(std::span<const double> action) {
  if (action.size() != 2) throw std::invalid_argument("DiffDriveEnv: expected 2 actions, got " + std::to_string(action.size()));
  const DiffDriveState next = diffdrive_step({state_[0], state_[1], state_[2]}, action[0], action[1], params_);
  distance_ += std::hypot(next[0] - state_[0], next[1] - state_[1]);
  state_.assign(next.begin(), next.end());
  ++steps_;
  advance_progress();
  StepOutcome out;
  out.done = succeeded() || steps_ >= max_steps();
  out.reward = succeeded() ? 0.0 : -mission_cost(state_, mission_, progress_);
  return out;
}

}  // namespace cady::env
