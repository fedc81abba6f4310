#pragma once

#include <array>
#include <numbers>

#include "cady/env/environment.hpp"

namespace cady::env {

struct DiffDriveParams {
  double dt = 0.1;
  double v_min = -1.0, v_max = 1.0;
  double omega_min = -std::numbers::pi / 3.0, omega_max = std::numbers::pi / 3.0;

  void validate() const;
};

/// State [x, y, theta]; action [v, omega].
using DiffDriveState = std::array<double, 3>;

/// x += v cos(theta) dt; y += v sin(theta) dt; theta += omega dt (wrapped).
/// Controls are clamped to their limits first.
DiffDriveState diffdrive_step(const DiffDriveState& s, double v, double omega, const DiffDriveParams& p);

struct Waypoint {
  double x = 0.0;
  double y = 0.0;
};

struct Mission {
  std::vector<Waypoint> waypoints;
  double arrival_radius = 0.5;
  double time_limit = 60.0;  // seconds
  DiffDriveState start{0.0, 0.0, 0.0};

  void validate() const;
};

/// Euclidean distance from (x, y) to waypoint `progress`.
double mission_cost(std::span<const double> state, const Mission& mission, std::size_t progress);

/// Diff-drive robot following a mission. Reward is minus the distance to the
/// active waypoint after the step. The episode ends when every waypoint has
/// been reached or the time limit expires.
class DiffDriveEnv final : public Environment {
 public:
  DiffDriveEnv(Mission mission, DiffDriveParams params = {});

  std::string name() const override { return "diffdrive"; }
  std::size_t state_dim() const override { return 3; }
  std::size_t action_dim() const override { return 2; }
  const std::vector<double>& action_low() const override { return low_; }
  const std::vector<double>& action_high() const override { return high_; }
  std::vector<std::string> state_names() const override { return {"x", "y", "theta"}; }
  std::vector<std::string> action_names() const override { return {"v", "omega"}; }
  std::vector<std::size_t> angle_dims() const override { return {2}; }

  /// Starts at mission.start; deterministic.
  void reset(Rng& rng) override;
  const std::vector<double>& state() const override { return state_; }
  StepOutcome step(std::span<const double> action) override;
  std::size_t max_steps() const override;
  std::size_t steps_taken() const override { return steps_; }

  const Mission& mission() const { return mission_; }
  const DiffDriveParams& params() const { return params_; }
  std::size_t progress() const { return progress_; }
  bool succeeded() const override { return progress_ == mission_.waypoints.size(); }
  double distance_traveled() const override { return distance_; }
  double elapsed_time() const override { return static_cast<double>(steps_) * params_.dt; }

 private:
  void advance_progress();

  Mission mission_;
  DiffDriveParams params_;
  std::vector<double> low_, high_;
  std::vector<double> state_;
  std::size_t steps_ = 0;
  std::size_t progress_ = 0;
  double distance_ = 0.0;
};

}  // namespace cady::env
