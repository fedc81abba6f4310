#include "cady/planning/objective.hpp"

#include <algorithm>
#include <cmath>

namespace cady::planning {

void CartpoleObjective::accumulate(std::span<const double> next_states, std::size_t batch, std::size_t,
                                   std::span<double> scores, std::vector<std::uint8_t>& alive) const {
  for (std::size_t k = 0; k < batch; ++k) {
    if (!alive[k]) continue;
    if (env::cartpole_out_of_bounds(next_states[k], next_states[batch + k], params_)) {
      alive[k] = 0;
    } else {
      scores[k] += 1.0;
    }
  }
}

void MissionObjective::observe(const env::Environment& e) {
  if (const auto* dd = dynamic_cast<const env::DiffDriveEnv*>(&e)) {
    progress_ = std::min(dd->progress(), mission_.waypoints.size() - 1);
  }
}

void MissionObjective::accumulate(std::span<const double> next_states, std::size_t batch, std::size_t,
                                  std::span<double> scores, std::vector<std::uint8_t>& alive) const {
  const env::Waypoint& w = mission_.waypoints[progress_];
  for (std::size_t k = 0; k < batch; ++k) {
    if (!alive[k]) continue;
    scores[k] -= std::hypot(next_states[k] - w.x, next_states[batch + k] - w.y);
  }
}

}  // namespace cady::planning
