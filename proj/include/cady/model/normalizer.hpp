#pragma once

#include <span>
#include <vector>

namespace cady::model {

/// Per-dimension standardization for model inputs [s; a] and delta targets.
struct Normalizer {
  static constexpr double kStdFloor = 1e-8;

  std::vector<double> in_mean, in_std;
  std::vector<double> out_mean, out_std;

  bool fitted() const { return !in_mean.empty() && !out_mean.empty(); }

  /// inputs: rows x in_dim row-major; deltas: rows x out_dim row-major.
  static Normalizer fit(std::span<const double> inputs, std::size_t in_dim,
                        std::span<const double> deltas, std::size_t out_dim);

  void normalize_input(std::span<const double> raw, std::span<double> out) const;
  void denormalize_input(std::span<const double> norm, std::span<double> out) const;
  void normalize_delta(std::span<const double> raw, std::span<double> out) const;
  void denormalize_delta(std::span<const double> norm, std::span<double> out) const;

  friend bool operator==(const Normalizer&, const Normalizer&) = default;
};

}  // namespace cady::model
