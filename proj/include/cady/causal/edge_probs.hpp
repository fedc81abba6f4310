#pragma once

// Distribution over bipartite causal graphs of one-step dynamics.
//
// Rows index the parents [s_t; a_t] (n + p of them), columns the children
// s_{t+1} (n). There are no other edges, so every graph is a DAG.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "cady/common.hpp"

namespace cady::causal {

/// One binary bipartite graph; M(i, j) = 1 keeps latent feature i for output j.
class CausalMask {
 public:
  CausalMask() = default;
  CausalMask(std::size_t rows, std::size_t cols, std::uint8_t fill = 1);

  static CausalMask ones(std::size_t rows, std::size_t cols) { return {rows, cols, 1}; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::uint8_t operator()(std::size_t i, std::size_t j) const { return bits_[i * cols_ + j]; }
  std::uint8_t& operator()(std::size_t i, std::size_t j) { return bits_[i * cols_ + j]; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  friend bool operator==(const CausalMask&, const CausalMask&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Bernoulli edge probabilities p(i, j).
class EdgeProbMatrix {
 public:
  EdgeProbMatrix() = default;
  /// Probabilities must lie in [0, 1]. rho_min records the clip bound the
  /// matrix was produced with (0 when unclipped, e.g. the all-ones matrix).
  EdgeProbMatrix(std::size_t rows, std::size_t cols, std::vector<double> p, double rho_min = 0.0);

  /// The fully wired distribution used by the contribution model.
  static EdgeProbMatrix ones(std::size_t rows, std::size_t cols);
  static EdgeProbMatrix constant(std::size_t rows, std::size_t cols, double p, double rho_min = 0.0);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double rho_min() const { return rho_min_; }
  double operator()(std::size_t i, std::size_t j) const { return p_[i * cols_ + j]; }
  const std::vector<double>& values() const { return p_; }

  bool is_all_ones() const;
  /// FNV-1a over the raw bytes of shape and values.
  std::uint64_t checksum() const;

  friend bool operator==(const EdgeProbMatrix&, const EdgeProbMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> p_;
  double rho_min_ = 0.0;
};

/// Each M(i, j) ~ Bernoulli(p(i, j)) independently. Entries equal to 1 (or 0)
/// are deterministic and consume no randomness.
CausalMask sample_mask(const EdgeProbMatrix& pm, Rng& rng);

/// Sum over cells of e ln p + (1 - e) ln(1 - p).
double graph_log_prob(const EdgeProbMatrix& pm, const CausalMask& mask);

/// Deterministic graph keeping edges with p >= threshold.
CausalMask threshold_mask(const EdgeProbMatrix& pm, double threshold = 0.5);

using Smoothing = std::function<double(double)>;
inline double cube_root_smoothing(double v) { return std::cbrt(v); }
inline double identity_smoothing(double v) { return v; }

/// Per column: clamp(s(|raw|) / max_i s(|raw|), rho_min, 1 - rho_min).
/// A column whose scores are all zero is set to rho_min everywhere.
EdgeProbMatrix normalize_probabilities(std::size_t rows, std::size_t cols,
                                       const std::vector<double>& raw,
                                       const Smoothing& smoothing = cube_root_smoothing,
                                       double rho_min = 0.02);

/// Heat-map CSV: header "parent,<child names>", one row per parent.
void write_edge_csv(std::ostream& os, const EdgeProbMatrix& pm,
                    const std::vector<std::string>& parent_names,
                    const std::vector<std::string>& child_names);

}  // namespace cady::causal
