#include "dagn/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace dagn {

std::string shape_to_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

namespace {

std::size_t checked_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) {
    if (d == 0) raise(ErrorKind::Dimension, "zero dimension in shape " + shape_to_string(shape));
    n *= d;
  }
  if (shape.empty()) raise(ErrorKind::Dimension, "empty shape");
  return n;
}

}  // namespace

Tensor Tensor::zeros(Shape shape) {
  std::size_t n = checked_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, 0.0));
}

Tensor Tensor::full(Shape shape, double value) {
  std::size_t n = checked_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::from(Shape shape, std::vector<double> data) {
  std::size_t n = checked_numel(shape);
  if (n != data.size()) {
    raise(ErrorKind::Dimension, "data length " + std::to_string(data.size()) +
                                    " does not match shape " + shape_to_string(shape));
  }
  return Tensor(std::move(shape), std::move(data));
}

std::size_t Tensor::rows() const {
  if (rank() != 2) raise(ErrorKind::Dimension, "rows() on tensor of shape " + shape_to_string(shape_));
  return shape_[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) raise(ErrorKind::Dimension, "cols() on tensor of shape " + shape_to_string(shape_));
  return shape_[1];
}

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace dagn
