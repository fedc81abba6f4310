#include "cady/model/normalizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cady::model {

namespace {

void column_stats(std::span<const double> data, std::size_t dim, std::vector<double>& mean,
                  std::vector<double>& stddev) {
  if (dim == 0 || data.size() % dim != 0) throw std::invalid_argument("Normalizer: bad dimensions");
  const std::size_t rows = data.size() / dim;
  if (rows == 0) throw std::invalid_argument("Normalizer: no rows to fit");
  mean.assign(dim, 0.0);
  stddev.assign(dim, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t d = 0; d < dim; ++d) mean[d] += data[r * dim + d];
  for (double& m : mean) m /= static_cast<double>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t d = 0; d < dim; ++d) {
      const double e = data[r * dim + d] - mean[d];
      stddev[d] += e * e;
    }
  }
  for (double& s : stddev) s = std::max(std::sqrt(s / static_cast<double>(rows)), Normalizer::kStdFloor);
}

void check(const std::vector<double>& stat, std::size_t a, std::size_t b) {
  if (stat.empty()) throw std::logic_error("Normalizer: not fitted");
  if (stat.size() != a || a != b) throw std::invalid_argument("Normalizer: dimension mismatch");
}

}  // namespace

Normalizer Normalizer::fit(std::span<const double> inputs, std::size_t in_dim,
                           std::span<const double> deltas, std::size_t out_dim) {
  Normalizer n;
  column_stats(inputs, in_dim, n.in_mean, n.in_std);
  column_stats(deltas, out_dim, n.out_mean, n.out_std);
  return n;
}

void Normalizer::normalize_input(std::span<const double> raw, std::span<double> out) const {
  check(in_mean, raw.size(), out.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - in_mean[i]) / in_std[i];
}

void Normalizer::denormalize_input(std::span<const double> norm, std::span<double> out) const {
  check(in_mean, norm.size(), out.size());
  for (std::size_t i = 0; i < norm.size(); ++i) out[i] = norm[i] * in_std[i] + in_mean[i];
}

void Normalizer::normalize_delta(std::span<const double> raw, std::span<double> out) const {
  check(out_mean, raw.size(), out.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - out_mean[i]) / out_std[i];
}

void Normalizer::denormalize_delta(std::span<const double> norm, std::span<double> out) const {
  check(out_mean, norm.size(), out.size());
  for (std::size_t i = 0; i < norm.size(); ++i) out[i] = norm[i] * out_std[i] + out_mean[i];
}

}  // namespace cady::model
