#pragma once

#include <span>
#include <string>
#include <vector>

#include "cady/common.hpp"

namespace cady::env {

struct StepOutcome {
  double reward = 0.0;
  bool done = false;
};

/// A simulator with mutable episode state. Actions passed to step() are
/// clamped to the bounds before integration.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  virtual std::size_t state_dim() const = 0;
  virtual std::size_t action_dim() const = 0;
  virtual const std::vector<double>& action_low() const = 0;
  virtual const std::vector<double>& action_high() const = 0;
  virtual std::vector<std::string> state_names() const = 0;
  virtual std::vector<std::string> action_names() const = 0;
  /// State dimensions holding angles.
  virtual std::vector<std::size_t> angle_dims() const { return {}; }

  virtual void reset(Rng& rng) = 0;
  virtual const std::vector<double>& state() const = 0;
  virtual StepOutcome step(std::span<const double> action) = 0;
  virtual std::size_t max_steps() const = 0;
  virtual std::size_t steps_taken() const = 0;

  /// Task-level outcome for goal-reaching environments.
  virtual bool succeeded() const { return false; }
  virtual double distance_traveled() const { return 0.0; }
  virtual double elapsed_time() const { return 0.0; }
};

/// Clamps each entry of `action` to [low, high] in place.
void clamp_action(std::span<double> action, std::span<const double> low, std::span<const double> high);

}  // namespace cady::env
