#include "cady/training/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace cady::training {

TransitionDataset::TransitionDataset(std::size_t state_dim, std::size_t action_dim,
                                     std::vector<std::size_t> angle_dims)
    : n_(state_dim), p_(action_dim), angle_dims_(std::move(angle_dims)) {
  if (n_ == 0) throw std::invalid_argument("TransitionDataset: state dimension must be >= 1");
  for (std::size_t d : angle_dims_) {
    if (d >= n_) throw std::invalid_argument("TransitionDataset: angle dimension out of range");
  }
}

void TransitionDataset::append(std::span<const double> state, std::span<const double> action,
                               std::span<const double> next_state, std::size_t trial, std::size_t step) {
  if (state.size() != n_ || next_state.size() != n_ || action.size() != p_) {
    throw std::invalid_argument("TransitionDataset: row dimensions (" + std::to_string(state.size()) + ", " +
                                std::to_string(action.size()) + ", " + std::to_string(next_state.size()) +
                                ") do not match (" + std::to_string(n_) + ", " + std::to_string(p_) + ", " +
                                std::to_string(n_) + ")");
  }
  auto finite = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  if (!finite(state) || !finite(action) || !finite(next_state)) {
    throw std::invalid_argument("TransitionDataset: non-finite value in trial " + std::to_string(trial) +
                                " step " + std::to_string(step));
  }
  states_.insert(states_.end(), state.begin(), state.end());
  actions_.insert(actions_.end(), action.begin(), action.end());
  next_.insert(next_.end(), next_state.begin(), next_state.end());
  trial_.push_back(trial);
  step_.push_back(step);
}

void TransitionDataset::append(const TransitionDataset& other) {
  if (other.n_ != n_ || other.p_ != p_) throw std::invalid_argument("TransitionDataset: dimension mismatch on merge");
  states_.insert(states_.end(), other.states_.begin(), other.states_.end());
  actions_.insert(actions_.end(), other.actions_.begin(), other.actions_.end());
  next_.insert(next_.end(), other.next_.begin(), other.next_.end());
  trial_.insert(trial_.end(), other.trial_.begin(), other.trial_.end());
  step_.insert(step_.end(), other.step_.begin(), other.step_.end());
}

std::vector<double> TransitionDataset::inputs() const {
  std::vector<double> x(size() * (n_ + p_));
  for (std::size_t r = 0; r < size(); ++r) {
    std::copy_n(states_.begin() + static_cast<std::ptrdiff_t>(r * n_), n_, x.begin() + static_cast<std::ptrdiff_t>(r * (n_ + p_)));
    std::copy_n(actions_.begin() + static_cast<std::ptrdiff_t>(r * p_), p_,
                x.begin() + static_cast<std::ptrdiff_t>(r * (n_ + p_) + n_));
  }
  return x;
}

std::vector<double> TransitionDataset::delta(std::size_t row) const {
  std::vector<double> d(n_);
  for (std::size_t j = 0; j < n_; ++j) d[j] = next_[row * n_ + j] - states_[row * n_ + j];
  for (std::size_t a : angle_dims_) d[a] = wrap_angle(d[a]);
  return d;
}

std::vector<double> TransitionDataset::deltas() const {
  std::vector<double> out;
  out.reserve(size() * n_);
  for (std::size_t r = 0; r < size(); ++r) {
    const auto d = delta(r);
    out.insert(out.end(), d.begin(), d.end());
  }
  return out;
}

TransitionDataset TransitionDataset::subset(std::span<const std::size_t> rows) const {
  TransitionDataset out(n_, p_, angle_dims_);
  for (std::size_t r : rows) {
    if (r >= size()) throw std::out_of_range("TransitionDataset: row index out of range");
    out.append(state(r), action(r), next_state(r), trial_[r], step_[r]);
  }
  return out;
}

TransitionDataset TransitionDataset::rows_in_steps(std::size_t first_step, std::size_t end_step) const {
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < size(); ++r) {
    if (step_[r] >= first_step && step_[r] < end_step) rows.push_back(r);
  }
  return subset(rows);
}

void TransitionDataset::write_csv(std::ostream& os) const {
  for (std::size_t j = 0; j < n_; ++j) os << 's' << j << ',';
  for (std::size_t j = 0; j < p_; ++j) os << 'a' << j << ',';
  for (std::size_t j = 0; j < n_; ++j) os << 's' << j << "_next,";
  os << "trial,step\n" << std::setprecision(17);
  for (std::size_t r = 0; r < size(); ++r) {
    for (double v : state(r)) os << v << ',';
    for (double v : action(r)) os << v << ',';
    for (double v : next_state(r)) os << v << ',';
    os << trial_[r] << ',' << step_[r] << '\n';
  }
}

TransitionDataset TransitionDataset::read_csv(std::istream& is, std::size_t state_dim, std::size_t action_dim,
                                              std::vector<std::size_t> angle_dims) {
  TransitionDataset out(state_dim, action_dim, std::move(angle_dims));
  std::ostringstream expected;
  for (std::size_t j = 0; j < state_dim; ++j) expected << 's' << j << ',';
  for (std::size_t j = 0; j < action_dim; ++j) expected << 'a' << j << ',';
  for (std::size_t j = 0; j < state_dim; ++j) expected << 's' << j << "_next,";
  expected << "trial,step";

  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("dataset CSV: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected.str()) {
    throw std::runtime_error("dataset CSV: header '" + line + "' does not match expected '" + expected.str() + "'");
  }
  const std::size_t width = 2 * state_dim + action_dim + 2;
  std::vector<double> values(width);
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::size_t c = 0;
    while (std::getline(ls, cell, ',')) {
      if (c >= width) {
        ++c;
        continue;
      }
      try {
        std::size_t used = 0;
        values[c] = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw std::runtime_error("dataset CSV line " + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
      ++c;
    }
    if (c != width) {
      throw std::runtime_error("dataset CSV line " + std::to_string(line_no) + ": expected " +
                               std::to_string(width) + " columns");
    }
    const std::span<const double> v(values);
    try {
      out.append(v.subspan(0, state_dim), v.subspan(state_dim, action_dim),
                 v.subspan(state_dim + action_dim, state_dim),
                 static_cast<std::size_t>(values[width - 2]), static_cast<std::size_t>(values[width - 1]));
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error("dataset CSV line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

DatasetSplit split_dataset(const TransitionDataset& data, double train_fraction, Rng& rng) {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
    throw std::invalid_argument("split_dataset: train fraction must lie in (0, 1]");
  }
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const auto cut = static_cast<std::size_t>(std::ceil(train_fraction * static_cast<double>(data.size()) - 1e-9));
  std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cut));
  std::vector<std::size_t> val(order.begin() + static_cast<std::ptrdiff_t>(cut), order.end());
  std::sort(train.begin(), train.end());
  std::sort(val.begin(), val.end());
  return {data.subset(train), data.subset(val)};
}

model::Normalizer fit_normalizer(const TransitionDataset& data) {
  if (data.empty()) throw std::invalid_argument("fit_normalizer: empty dataset");
  return model::Normalizer::fit(data.inputs(), data.state_dim() + data.action_dim(), data.deltas(),
                                data.state_dim());
}

}  // namespace cady::training
