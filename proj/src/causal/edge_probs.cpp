#include "cady/causal/edge_probs.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace cady::causal {

CausalMask::CausalMask(std::size_t rows, std::size_t cols, std::uint8_t fill)
    : rows_(rows), cols_(cols), bits_(rows * cols, fill) {}

EdgeProbMatrix::EdgeProbMatrix(std::size_t rows, std::size_t cols, std::vector<double> p,
                               double rho_min)
    : rows_(rows), cols_(cols), p_(std::move(p)), rho_min_(rho_min) {
  if (p_.size() != rows * cols) throw std::invalid_argument("EdgeProbMatrix: size mismatch");
  for (double v : p_) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("EdgeProbMatrix: probability outside [0,1]");
  }
  if (!(rho_min >= 0.0 && rho_min < 0.5)) throw std::invalid_argument("EdgeProbMatrix: rho_min outside [0,0.5)");
}

EdgeProbMatrix EdgeProbMatrix::ones(std::size_t rows, std::size_t cols) {
  return EdgeProbMatrix(rows, cols, std::vector<double>(rows * cols, 1.0));
}

EdgeProbMatrix EdgeProbMatrix::constant(std::size_t rows, std::size_t cols, double p, double rho_min) {
  return EdgeProbMatrix(rows, cols, std::vector<double>(rows * cols, p), rho_min);
}

bool EdgeProbMatrix::is_all_ones() const {
  return std::all_of(p_.begin(), p_.end(), [](double v) { return v == 1.0; });
}

std::uint64_t EdgeProbMatrix::checksum() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  };
  const std::uint64_t dims[2] = {rows_, cols_};
  mix(dims, sizeof dims);
  mix(p_.data(), p_.size() * sizeof(double));
  return h;
}

CausalMask sample_mask(const EdgeProbMatrix& pm, Rng& rng) {
  CausalMask m(pm.rows(), pm.cols(), 0);
  for (std::size_t i = 0; i < pm.rows(); ++i) {
    for (std::size_t j = 0; j < pm.cols(); ++j) {
      const double p = pm(i, j);
      if (p >= 1.0) {
        m(i, j) = 1;
      } else if (p > 0.0) {
        m(i, j) = uniform01(rng) < p ? 1 : 0;
      }
    }
  }
  return m;
}

double graph_log_prob(const EdgeProbMatrix& pm, const CausalMask& mask) {
  if (pm.rows() != mask.rows() || pm.cols() != mask.cols()) {
    throw std::invalid_argument("graph_log_prob: mask shape does not match probability matrix");
  }
  double lp = 0.0;
  for (std::size_t i = 0; i < pm.rows(); ++i) {
    for (std::size_t j = 0; j < pm.cols(); ++j) {
      lp += mask(i, j) ? std::log(pm(i, j)) : std::log1p(-pm(i, j));
    }
  }
  return lp;
}

CausalMask threshold_mask(const EdgeProbMatrix& pm, double threshold) {
  CausalMask m(pm.rows(), pm.cols(), 0);
  for (std::size_t i = 0; i < pm.rows(); ++i)
    for (std::size_t j = 0; j < pm.cols(); ++j) m(i, j) = pm(i, j) >= threshold ? 1 : 0;
  return m;
}

EdgeProbMatrix normalize_probabilities(std::size_t rows, std::size_t cols,
                                       const std::vector<double>& raw, const Smoothing& smoothing,
                                       double rho_min) {
  if (raw.size() != rows * cols) throw std::invalid_argument("normalize_probabilities: size mismatch");
  if (!(rho_min > 0.0 && rho_min < 0.5)) {
    throw std::invalid_argument("normalize_probabilities: rho_min must lie in (0, 0.5)");
  }
  std::vector<double> p(rows * cols, rho_min);
  std::vector<double> s(rows);
  for (std::size_t j = 0; j < cols; ++j) {
    double top = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      s[i] = smoothing(std::abs(raw[i * cols + j]));
      top = std::max(top, s[i]);
    }
    if (!(top > 0.0)) continue;
    for (std::size_t i = 0; i < rows; ++i) {
      p[i * cols + j] = std::clamp(s[i] / top, rho_min, 1.0 - rho_min);
    }
  }
  return EdgeProbMatrix(rows, cols, std::move(p), rho_min);
}

void write_edge_csv(std::ostream& os, const EdgeProbMatrix& pm,
                    const std::vector<std::string>& parent_names,
                    const std::vector<std::string>& child_names) {
  if (parent_names.size() != pm.rows() || child_names.size() != pm.cols()) {
    throw std::invalid_argument("write_edge_csv: name count does not match matrix shape");
  }
  os << "parent";
  for (const auto& c : child_names) os << ',' << c;
  os << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < pm.rows(); ++i) {
    os << parent_names[i];
    for (std::size_t j = 0; j < pm.cols(); ++j) os << ',' << pm(i, j);
    os << '\n';
  }
}

}  // namespace cady::causal
