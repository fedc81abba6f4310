#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cady/env/cartpole.hpp"
#include "cady/env/diffdrive.hpp"

namespace cady::planning {

/// Per-step reward of predicted states (higher is better). Candidates whose
/// `alive` flag is cleared stop accumulating.
class Objective {
 public:
  virtual ~Objective() = default;
  /// Called once per control step with the current environment.
  virtual void observe(const env::Environment&) {}
  /// next_states is (state_dim x batch); adds into scores.
  virtual void accumulate(std::span<const double> next_states, std::size_t batch, std::size_t t,
                          std::span<double> scores, std::vector<std::uint8_t>& alive) const = 0;
};

/// 1 per surviving step, 0 and termination once the pole or cart leaves bounds.
class CartpoleObjective final : public Objective {
 public:
  explicit CartpoleObjective(env::CartpoleParams params = {}) : params_(params) {}
  void accumulate(std::span<const double> next_states, std::size_t batch, std::size_t t,
                  std::span<double> scores, std::vector<std::uint8_t>& alive) const override;

 private:
  env::CartpoleParams params_;
};

/// Minus the distance to the active waypoint of the observed mission.
class MissionObjective final : public Objective {
 public:
  explicit MissionObjective(env::Mission mission) : mission_(std::move(mission)) {}
  void observe(const env::Environment& e) override;
  void set_progress(std::size_t progress) { progress_ = progress; }
  void accumulate(std::span<const double> next_states, std::size_t batch, std::size_t t,
                  std::span<double> scores, std::vector<std::uint8_t>& alive) const override;

 private:
  env::Mission mission_;
  std::size_t progress_ = 0;
};

}  // namespace cady::planning
