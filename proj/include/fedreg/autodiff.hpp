#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "fedreg/tensor.hpp"

namespace fedreg {

struct Value {
  std::uint32_t idx = 0;
};

// Reverse-mode autodiff tape. The graph is rebuilt per training step; nodes
// cache their forward value and accumulate adjoints during backward(). Parents
// always precede children, so reverse creation order is a topological order.
class Graph {
 public:
  Value constant(Tensor t);  // no gradient tracked
  Value leaf(Tensor t);      // parameter leaf, gradient tracked

  // elementwise and structural
  Value add(Value a, Value b);
  Value sub(Value a, Value b);
  Value mul(Value a, Value b);
  Value scale(Value a, double c);
  Value add_row_broadcast(Value m, Value v);  // [TxD] + [D]
  Value matmul(Value a, Value b);
  Value transpose(Value a);
  Value softmax_rows(Value a);      // rows are max-subtracted before exp
  Value log_softmax_rows(Value a);
  Value layer_norm_rows(Value x, Value gain, Value bias, double eps = 1e-5);
  Value gelu(Value a);              // exact erf form
  Value log_clamped(Value a, double floor);
  Value logaddexp(Value a, Value b);

  // reductions
  Value sum_all(Value a);     // -> scalar
  Value mean_all(Value a);    // -> scalar
  Value mean_rows(Value a);   // [TxD] -> [D], column means (time pooling)
  Value squared_l2(Value a);  // sum of squares -> scalar

  // indexing
  Value slice_cols(Value a, std::size_t c0, std::size_t n);
  Value concat_cols(const std::vector<Value>& parts);
  Value row(Value a, std::size_t r);                     // [RxC] -> [C]
  Value gather(Value v, std::vector<std::size_t> idx);   // 1-D gather
  Value shift_right(Value v, std::size_t k, double fill);  // 1-D, fill has no grad
  Value pick(Value v, std::size_t i);                    // 1-D -> scalar

  // Clears all adjoints, then propagates from root (must be scalar-valued).
  void backward(Value root);

  const Tensor& value(Value v) const { return nodes_[v.idx].value; }
  // Zero tensor of the node's shape when the node was not reached by backward.
  Tensor adjoint(Value v) const;
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor adj;  // empty until first accumulation
    bool requires_grad = false;
    std::function<void(Graph&, std::uint32_t)> backprop;  // empty for leaves/constants
  };

  std::vector<Node> nodes_;

  Value push(Tensor value, bool requires_grad,
             std::function<void(Graph&, std::uint32_t)> backprop);
  void accumulate(std::uint32_t idx, const std::vector<double>& contrib);
  void accumulate_scaled(std::uint32_t idx, const std::vector<double>& contrib, double c);
  const Tensor& adj_of(std::uint32_t idx) const { return nodes_[idx].adj; }
  bool grad(Value v) const { return nodes_[v.idx].requires_grad; }

  friend struct GraphOps;
};

}  // namespace fedreg
