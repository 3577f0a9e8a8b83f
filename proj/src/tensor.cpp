#include "unotb/tensor.hpp"

#include <cassert>
#include <cmath>
#include <cstring>

#include "unotb/error.hpp"

namespace unotb {

namespace {
int64_t shape_product(const std::vector<int64_t>& shape) {
  int64_t n = 1;
  for (const int64_t d : shape) {
    if (d < 0) throw ConfigError("tensor shape has negative dimension");
    n *= d;
  }
  return n;
}
}  // namespace

Tensor::Tensor(std::vector<int64_t> shape)
    : shape_(std::move(shape)), data_(static_cast<size_t>(shape_product(shape_)), 0.0) {}

Tensor Tensor::full(std::vector<int64_t> shape, double value) {
  Tensor t(std::move(shape));
  t.fill(value);
  return t;
}

Tensor Tensor::scalar(double value) {
  Tensor t({1});
  t[0] = value;
  return t;
}

Tensor Tensor::row(std::span<const double> values) {
  Tensor t({1, static_cast<int64_t>(values.size())});
  std::memcpy(t.data(), values.data(), values.size() * sizeof(double));
  return t;
}

Tensor Tensor::column(std::span<const double> values) {
  Tensor t({static_cast<int64_t>(values.size()), 1});
  std::memcpy(t.data(), values.data(), values.size() * sizeof(double));
  return t;
}

Tensor Tensor::matrix(int64_t rows, int64_t cols, std::span<const double> values) {
  Tensor t({rows, cols});
  if (static_cast<int64_t>(values.size()) != rows * cols)
    throw ConfigError("matrix literal size mismatch");
  std::memcpy(t.data(), values.data(), values.size() * sizeof(double));
  return t;
}

int64_t Tensor::rows() const {
  assert(rank() == 2);
  return shape_[0];
}

int64_t Tensor::cols() const {
  assert(rank() == 2);
  return shape_[1];
}

double& Tensor::at(int64_t r, int64_t c) {
  assert(rank() == 2 && r >= 0 && r < shape_[0] && c >= 0 && c < shape_[1]);
  return data_[static_cast<size_t>(r * shape_[1] + c)];
}

double Tensor::at(int64_t r, int64_t c) const {
  assert(rank() == 2 && r >= 0 && r < shape_[0] && c >= 0 && c < shape_[1]);
  return data_[static_cast<size_t>(r * shape_[1] + c)];
}

std::span<const double> Tensor::row_span(int64_t r) const {
  assert(rank() == 2);
  return {data_.data() + r * shape_[1], static_cast<size_t>(shape_[1])};
}

std::span<double> Tensor::row_span(int64_t r) {
  assert(rank() == 2);
  return {data_.data() + r * shape_[1], static_cast<size_t>(shape_[1])};
}

void Tensor::fill(double value) {
  for (double& x : data_) x = value;
}

bool Tensor::all_finite() const {
  for (const double x : data_)
    if (!std::isfinite(x)) return false;
  return true;
}

std::string Tensor::shape_str() const {
  std::string s = "[";
  for (size_t i = 0; i < shape_.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape_[i]);
  }
  return s + "]";
}

}  // namespace unotb
