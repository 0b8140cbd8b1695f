#include "fedreg/tensor.hpp"

#include <sstream>

#include "fedreg/errors.hpp"

namespace fedreg {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

Tensor::Tensor(std::vector<std::size_t> shape_in, std::vector<double> data_in)
    : shape(std::move(shape_in)), data(std::move(data_in)) {
  if (shape_product(shape) != data.size()) {
    throw ContractViolation("tensor shape " + shape_str() + " does not match data length " +
                            std::to_string(data.size()));
  }
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
  std::size_t n = shape_product(shape);
  return Tensor(std::move(shape), std::vector<double>(n, 0.0));
}

Tensor Tensor::full(std::vector<std::size_t> shape, double value) {
  std::size_t n = shape_product(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::scalar(double value) { return Tensor({1}, {value}); }

Tensor Tensor::vec(std::vector<double> values) {
  std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

std::size_t Tensor::rows() const {
  if (shape.size() != 2) throw ContractViolation("rows() on non-matrix " + shape_str());
  return shape[0];
}

std::size_t Tensor::cols() const {
  if (shape.size() != 2) throw ContractViolation("cols() on non-matrix " + shape_str());
  return shape[1];
}

double& Tensor::at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }

double Tensor::at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ConfigError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                      b.shape_str());
  }
}

}  // namespace fedreg
