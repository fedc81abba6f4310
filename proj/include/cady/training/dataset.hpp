#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "cady/common.hpp"
#include "cady/model/normalizer.hpp"

namespace cady::training {

/// Rows of (s_t, a_t, s_{t+1}) tagged with (trial, step). Append-only.
class TransitionDataset {
 public:
  TransitionDataset() = default;
  TransitionDataset(std::size_t state_dim, std::size_t action_dim,
                    std::vector<std::size_t> angle_dims = {});

  std::size_t state_dim() const { return n_; }
  std::size_t action_dim() const { return p_; }
  const std::vector<std::size_t>& angle_dims() const { return angle_dims_; }
  std::size_t size() const { return trial_.size(); }
  bool empty() const { return trial_.empty(); }

  /// Rejects wrong lengths and non-finite values.
  void append(std::span<const double> state, std::span<const double> action,
              std::span<const double> next_state, std::size_t trial, std::size_t step);
  void append(const TransitionDataset& other);

  std::span<const double> state(std::size_t row) const { return {states_.data() + row * n_, n_}; }
  std::span<const double> action(std::size_t row) const { return {actions_.data() + row * p_, p_}; }
  std::span<const double> next_state(std::size_t row) const { return {next_.data() + row * n_, n_}; }
  std::size_t trial(std::size_t row) const { return trial_[row]; }
  std::size_t step(std::size_t row) const { return step_[row]; }

  /// Row-major [s; a] inputs, rows x (n + p).
  std::vector<double> inputs() const;
  /// Row-major s_{t+1} - s_t, with angle dimensions wrapped to (-pi, pi].
  std::vector<double> deltas() const;
  std::vector<double> delta(std::size_t row) const;

  TransitionDataset subset(std::span<const std::size_t> rows) const;
  TransitionDataset rows_in_steps(std::size_t first_step, std::size_t end_step) const;

  /// Header: s0..s{n-1}, a0..a{p-1}, s0_next..s{n-1}_next, trial, step.
  void write_csv(std::ostream& os) const;
  static TransitionDataset read_csv(std::istream& is, std::size_t state_dim, std::size_t action_dim,
                                    std::vector<std::size_t> angle_dims = {});

  friend bool operator==(const TransitionDataset&, const TransitionDataset&) = default;

 private:
  std::size_t n_ = 0, p_ = 0;
  std::vector<std::size_t> angle_dims_;
  std::vector<double> states_, actions_, next_;
  std::vector<std::size_t> trial_, step_;
};

struct DatasetSplit {
  TransitionDataset train;
  TransitionDataset validation;
};

/// Seeded shuffle, first ceil(fraction * rows) rows to train.
DatasetSplit split_dataset(const TransitionDataset& data, double train_fraction, Rng& rng);

/// Normalizer over the dataset's inputs and (wrapped) deltas.
model::Normalizer fit_normalizer(const TransitionDataset& data);

}  // namespace cady::training
