#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace fedreg {

// Dense row-major tensor of 64-bit floats. Rank is dynamic; the code base
// only ever uses rank 1 (vectors) and rank 2 (matrices), plus {1} scalars.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::vector<std::size_t> shape_in, std::vector<double> data_in);

  static Tensor zeros(std::vector<std::size_t> shape);
  static Tensor full(std::vector<std::size_t> shape, double value);
  static Tensor scalar(double value);
  static Tensor vec(std::vector<double> values);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t size() const { return data.size(); }
  bool is_scalar() const { return data.size() == 1; }
  bool same_shape(const Tensor& other) const { return shape == other.shape; }

  // 2-D accessors; throw ContractViolation on rank misuse.
  std::size_t rows() const;
  std::size_t cols() const;
  double& at(std::size_t r, std::size_t c);
  double at(std::size_t r, std::size_t c) const;

  std::string shape_str() const;  // e.g. "[3x4]"
};

std::size_t shape_product(const std::vector<std::size_t>& shape);

// Throws ConfigError with both shapes in the message when they differ.
void require_same_shape(const Tensor& a, const Tensor& b, const char* op);

}  // namespace fedreg
