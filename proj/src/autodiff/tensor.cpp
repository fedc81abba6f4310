#include "cady/autodiff/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cady::ad {

std::string to_string(Shape s) {
  return "(" + std::to_string(s.rows) + "x" + std::to_string(s.cols) + ")";
}

Tensor::Tensor(std::size_t rows, std::size_t cols, double fill)
    : shape_{rows, cols}, data_(rows * cols, fill) {}

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> data)
    : shape_{rows, cols}, data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw std::invalid_argument("tensor data length " + std::to_string(data_.size()) +
                                " does not match shape " + to_string(shape_));
  }
}

Tensor Tensor::checked(std::size_t rows, std::size_t cols, std::vector<double> data) {
  Tensor t(rows, cols, std::move(data));
  if (!t.all_finite()) throw std::invalid_argument("tensor contains non-finite values");
  return t;
}

Tensor Tensor::column(std::vector<double> data) {
  const std::size_t n = data.size();
  return Tensor(n, 1, std::move(data));
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

}  // namespace cady::ad
