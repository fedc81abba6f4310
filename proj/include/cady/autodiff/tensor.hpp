#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace cady::ad {

struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const { return rows * cols; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(Shape s);

/// Dense row-major matrix of doubles. Vectors are columns (n x 1), scalars 1 x 1.
/// Batched activations are stored feature-major: (features x batch).
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0);
  Tensor(std::size_t rows, std::size_t cols, std::vector<double> data);

  /// Like the data constructor but rejects NaN/Inf.
  static Tensor checked(std::size_t rows, std::size_t cols, std::vector<double> data);
  static Tensor column(std::vector<double> data);
  static Tensor scalar(double v) { return Tensor(1, 1, v); }

  Shape shape() const { return shape_; }
  std::vector<std::size_t> shape_list() const { return {shape_.rows, shape_.cols}; }
  std::size_t rows() const { return shape_.rows; }
  std::size_t cols() const { return shape_.cols; }
  std::size_t size() const { return data_.size(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::vector<double>& storage() { return data_; }
  const std::vector<double>& storage() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * shape_.cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * shape_.cols + c]; }

  bool all_finite() const;
  void fill(double v);

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_{};
  std::vector<double> data_;
};

}  // namespace cady::ad
