#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace unotb {

// Dense row-major double tensor. Rank is dynamic but in practice everything
// here is rank 1 or 2. Kernels operate on raw pointers; this type just owns
// storage and shape.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int64_t> shape);
  Tensor(std::initializer_list<int64_t> shape)
      : Tensor(std::vector<int64_t>(shape)) {}

  static Tensor zeros(std::vector<int64_t> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<int64_t> shape, double value);
  static Tensor scalar(double value);
  static Tensor row(std::span<const double> values);          // shape [1, n]
  static Tensor column(std::span<const double> values);       // shape [n, 1]
  static Tensor matrix(int64_t rows, int64_t cols, std::span<const double> values);

  const std::vector<int64_t>& shape() const { return shape_; }
  int64_t rank() const { return static_cast<int64_t>(shape_.size()); }
  int64_t size() const { return static_cast<int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  // Rank-2 accessors; assert on misuse in debug builds.
  int64_t rows() const;
  int64_t cols() const;
  double& at(int64_t r, int64_t c);
  double at(int64_t r, int64_t c) const;
  double& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
  double operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<const double> row_span(int64_t r) const;
  std::span<double> row_span(int64_t r);

  void fill(double value);
  bool all_finite() const;
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  std::string shape_str() const;

 private:
  std::vector<int64_t> shape_;
  std::vector<double> data_;
};

}  // namespace unotb
