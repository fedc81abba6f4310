#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cady/common.hpp"

namespace cady::env {

enum class FaultMode { None, Freeze, GaussianNoise };

struct FaultConfig {
  FaultMode mode = FaultMode::None;
  std::size_t index = 0;        // frozen state variable
  double onset_fraction = 0.1;  // of the episode length
  double variance = 0.0;        // observation noise variance

  static FaultConfig none() { return {}; }
  static FaultConfig freeze(std::size_t index, double onset_fraction);
  static FaultConfig gaussian_noise(double variance);

  void validate(std::size_t state_dim) const;
  std::string label() const;
};

/// Held value for a frozen variable; updated while the fault is inactive.
struct FaultMemory {
  std::optional<double> held;
};

/// First step at which a freeze is active.
std::size_t freeze_onset_step(const FaultConfig& fault, std::size_t episode_length);

/// Corrupts an observation. The true simulator state is never touched.
std::vector<double> apply_fault(std::span<const double> observation, const FaultConfig& fault,
                                std::size_t t, std::size_t episode_length, FaultMemory& memory,
                                Rng& rng);

struct InterventionSchedule {
  std::size_t onset_step = 0;
  std::vector<double> gains;  // per control; empty means identity

  static InterventionSchedule identity() { return {}; }
  bool is_identity() const;
  void validate(std::size_t action_dim) const;
  std::string label() const;
};

/// Before onset: the action itself. At or after onset: gain-scaled and
/// clamped to [low, high].
std::vector<double> apply_intervention(std::span<const double> action,
                                       const InterventionSchedule& schedule, std::size_t t,
                                       std::span<const double> low, std::span<const double> high);

}  // namespace cady::env
