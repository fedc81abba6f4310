#include "cady/env/faults.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "cady/env/environment.hpp"

namespace cady::env {

FaultConfig FaultConfig::freeze(std::size_t index, double onset_fraction) {
  FaultConfig f;
  f.mode = FaultMode::Freeze;
  f.index = index;
  f.onset_fraction = onset_fraction;
  return f;
}

FaultConfig FaultConfig::gaussian_noise(double variance) {
  FaultConfig f;
  f.mode = FaultMode::GaussianNoise;
  f.variance = variance;
  return f;
}

void FaultConfig::validate(std::size_t state_dim) const {
  if (mode == FaultMode::Freeze) {
    if (index >= state_dim) throw std::invalid_argument("FaultConfig: freeze index out of range");
    if (!(onset_fraction > 0.0 && onset_fraction < 1.0)) {
      throw std::invalid_argument("FaultConfig: onset fraction must lie in (0, 1)");
    }
  }
  if (mode == FaultMode::GaussianNoise && !(variance >= 0.0)) {
    throw std::invalid_argument("FaultConfig: noise variance must be >= 0");
  }
}

std::string FaultConfig::label() const {
  std::ostringstream os;
  switch (mode) {
    case FaultMode::None: os << "none"; break;
    case FaultMode::Freeze: os << "freeze_" << index; break;
    case FaultMode::GaussianNoise: os << "noise_" << variance; break;
  }
  return os.str();
}

std::size_t freeze_onset_step(const FaultConfig& fault, std::size_t episode_length) {
  return static_cast<std::size_t>(std::floor(fault.onset_fraction * static_cast<double>(episode_length) + 1e-9));
}

std::vector<double> apply_fault(std::span<const double> observation, const FaultConfig& fault,
                                std::size_t t, std::size_t episode_length, FaultMemory& memory,
                                Rng& rng) {
  std::vector<double> out(observation.begin(), observation.end());
  switch (fault.mode) {
    case FaultMode::None:
      break;
    case FaultMode::Freeze:
      if (t < freeze_onset_step(fault, episode_length) || !memory.held) {
        memory.held = out.at(fault.index);
      } else {
        out[fault.index] = *memory.held;
      }
      break;
    case FaultMode::GaussianNoise:
      if (fault.variance > 0.0) {
        const double sd = std::sqrt(fault.variance);
        for (double& v : out) v += sd * standard_normal(rng);
      }
      break;
  }
  return out;
}

bool InterventionSchedule::is_identity() const {
  return std::all_of(gains.begin(), gains.end(), [](double g) { return g == 1.0; });
}

void InterventionSchedule::validate(std::size_t action_dim) const {
  if (!gains.empty() && gains.size() != action_dim) {
    throw std::invalid_argument("InterventionSchedule: expected " + std::to_string(action_dim) +
                                " gains, got " + std::to_string(gains.size()));
  }
  for (double g : gains) {
    if (!std::isfinite(g)) throw std::invalid_argument("InterventionSchedule: gains must be finite");
  }
}

std::string InterventionSchedule::label() const {
  if (gains.empty()) return "identity";
  std::ostringstream os;
  os << "gains";
  for (double g : gains) os << '_' << g;
  return os.str();
}

std::vector<double> apply_intervention(std::span<const double> action,
                                       const InterventionSchedule& schedule, std::size_t t,
                                       std::span<const double> low, std::span<const double> high) {
  std::vector<double> out(action.begin(), action.end());
  if (schedule.gains.empty() || t < schedule.onset_step) return out;
  schedule.validate(action.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= schedule.gains[i];
  clamp_action(out, low, high);
  return out;
}

}  // namespace cady::env
