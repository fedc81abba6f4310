#include "cady/training/sysid.hpp"

#include <numbers>
#include <stdexcept>

namespace cady::training {

void SysidConfig::validate() const {
  if (transitions < 1) throw std::invalid_argument("SysidConfig: transitions must be >= 1");
  if (episode_length < 1) throw std::invalid_argument("SysidConfig: episode_length must be >= 1");
  if (!(position_range >= 0.0)) throw std::invalid_argument("SysidConfig: position_range must be >= 0");
}

TransitionDataset generate_sysid_dataset(const env::DiffDriveParams& params, const SysidConfig& cfg, Rng& rng) {
  params.validate();
  cfg.validate();
  TransitionDataset data(3, 2, {2});
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * uniform01(rng); };
  for (std::size_t episode = 0; data.size() < cfg.transitions; ++episode) {
    env::DiffDriveState s{uniform(-cfg.position_range, cfg.position_range),
                          uniform(-cfg.position_range, cfg.position_range),
                          uniform(-std::numbers::pi, std::numbers::pi)};
    for (std::size_t t = 0; t < cfg.episode_length && data.size() < cfg.transitions; ++t) {
      const double a[2] = {uniform(params.v_min, params.v_max), uniform(params.omega_min, params.omega_max)};
      const auto next = env::diffdrive_step(s, a[0], a[1], params);
      data.append(s, a, next, episode, t);
      s = next;
    }
  }
  return data;
}

}  // namespace cady::training
