#include "fedreg/autodiff.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "fedreg/errors.hpp"

namespace fedreg {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_matrix(const Tensor& t, const char* op) {
  if (t.shape.size() != 2) {
    throw ConfigError(std::string(op) + ": expected a matrix, got " + t.shape_str());
  }
}

void require_vector(const Tensor& t, const char* op) {
  if (t.shape.size() != 1) {
    throw ConfigError(std::string(op) + ": expected a vector, got " + t.shape_str());
  }
}
}  // namespace

Value Graph::push(Tensor value, bool requires_grad,
                  std::function<void(Graph&, std::uint32_t)> backprop) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  node.backprop = std::move(backprop);
  nodes_.push_back(std::move(node));
  return Value{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

void Graph::accumulate(std::uint32_t idx, const std::vector<double>& contrib) {
  accumulate_scaled(idx, contrib, 1.0);
}

void Graph::accumulate_scaled(std::uint32_t idx, const std::vector<double>& contrib, double c) {
  Node& node = nodes_[idx];
  if (!node.requires_grad) return;
  if (node.adj.data.empty()) node.adj = Tensor::zeros(node.value.shape);
  for (std::size_t i = 0; i < contrib.size(); ++i) node.adj.data[i] += c * contrib[i];
}

Tensor Graph::adjoint(Value v) const {
  const Node& node = nodes_[v.idx];
  if (node.adj.data.empty()) return Tensor::zeros(node.value.shape);
  return node.adj;
}

void Graph::backward(Value root) {
  const Node& root_node = nodes_[root.idx];
  if (!root_node.value.is_scalar()) {
    throw ContractViolation("backward: root must be scalar-valued, got " +
                            root_node.value.shape_str());
  }
  for (Node& node : nodes_) node.adj = Tensor();
  if (!root_node.requires_grad) return;  // gradient of a constant is zero everywhere
  nodes_[root.idx].adj = Tensor::full(root_node.value.shape, 1.0);
  for (std::uint32_t i = root.idx + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (node.adj.data.empty() || !node.backprop) continue;
    node.backprop(*this, i);
  }
}

Value Graph::constant(Tensor t) { return push(std::move(t), false, nullptr); }

Value Graph::leaf(Tensor t) { return push(std::move(t), true, nullptr); }

Value Graph::add(Value a, Value b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  require_same_shape(ta, tb, "add");
  Tensor out = ta;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += tb.data[i];
  auto bp = [a, b](Graph& g, std::uint32_t self) {
    const auto& adj = g.adj_of(self).data;
    g.accumulate(a.idx, adj);
    g.accumulate(b.idx, adj);
  };
  return push(std::move(out), grad(a) || grad(b), bp);
}

Value Graph::sub(Value a, Value b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  require_same_shape(ta, tb, "sub");
  Tensor out = ta;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= tb.data[i];
  auto bp = [a, b](Graph& g, std::uint32_t self) {
    const auto& adj = g.adj_of(self).data;
    g.accumulate(a.idx, adj);
    g.accumulate_scaled(b.idx, adj, -1.0);
  };
  return push(std::move(out), grad(a) || grad(b), bp);
}

Value Graph::mul(Value a, Value b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  require_same_shape(ta, tb, "mul");
  Tensor out = ta;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= tb.data[i];
  auto bp = [a, b](Graph& g, std::uint32_t self) {
    const auto& adj = g.adj_of(self).data;
    const auto& va = g.value(a).data;
    const auto& vb = g.value(b).data;
    std::vector<double> da(adj.size()), db(adj.size());
    for (std::size_t i = 0; i < adj.size(); ++i) {
      da[i] = adj[i] * vb[i];
      db[i] = adj[i] * va[i];
    }
    g.accumulate(a.idx, da);
    g.accumulate(b.idx, db);
  };
  return push(std::move(out), grad(a) || grad(b), bp);
}

Value Graph::scale(Value a, double c) {
  Tensor out = value(a);
  for (double& v : out.data) v *= c;
  auto bp = [a, c](Graph& g, std::uint32_t self) {
    g.accumulate_scaled(a.idx, g.adj_of(self).data, c);
  };
  return push(std::move(out), grad(a), bp);
}

Value Graph::add_row_broadcast(Value m, Value v) {
  const Tensor& tm = value(m);
  const Tensor& tv = value(v);
  require_matrix(tm, "add_row_broadcast");
  require_vector(tv, "add_row_broadcast");
  if (tm.cols() != tv.size()) {
    throw ConfigError("add_row_broadcast: shape mismatch " + tm.shape_str() + " vs " +
                      tv.shape_str());
  }
  Tensor out = tm;
  std::size_t rows = tm.rows(), cols = tm.cols();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out.data[r * cols + c] += tv.data[c];
  auto bp = [m, v, rows, cols](Graph& g, std::uint32_t self) {
    const auto& adj = g.adj_of(self).data;
    g.accumulate(m.idx, adj);
    std::vector<double> dv(cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) dv[c] += adj[r * cols + c];
    g.accumulate(v.idx, dv);
  };
  return push(std::move(out), grad(m) || grad(v), bp);
}

Value Graph::matmul(Value a, Value b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  require_matrix(ta, "matmul");
  require_matrix(tb, "matmul");
  if (ta.cols() != tb.rows()) {
    throw ConfigError("matmul: shape mismatch " + ta.shape_str() + " vs " + tb.shape_str());
  }
  std::size_t m = ta.rows(), k = ta.cols(), n = tb.cols();
  Tensor out = Tensor::zeros({m, n});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      double av = ta.data[i * k + p];
      if (av == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) out.data[i * n + j] += av * tb.data[p * n + j];
    }
  auto bp = [a, b, m, k, n](Graph& g, std::uint32_t self) {
    const auto& adj = g.adj_of(self).data;
    const auto& va = g.value(a).data;
    const auto& vb = g.value(b).data;
    if (g.grad(a)) {
      std::vector<double> da(m * k, 0.0);  // dC * B^T
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          double gv = adj[i * n + j];
          if (gv == 0.0) continue;
          for (std::size_t p = 0; p < k; ++p) da[i * k + p] += gv * vb[p * n + j];
        }
      g.accumulate(a.idx, da);
    }
    if (g.grad(b)) {
      std::vector<double> db(k * n, 0.0);  // A^T * dC
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double av = va[i * k + p];
          if (av == 0.0) continue;
          for (std::size_t j = 0; j < n; ++j) db[p * n + j] += av * adj[i * n + j];
        }
      g.accumulate(b.idx, db);
    }
  };
  return push(std::move(out), grad(a) || grad(b), bp);
}

Value Graph::transpose(Value a) {
  const Tensor& ta = value(a);
  require_matrix(ta, "transpose");
  std::size_t r = ta.rows(), c = ta.cols();
  Tensor out = Tensor::zeros({c, r});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out.data[j * r + i] = ta.data[i * c + j];
  auto bp = [a, r, c](Graph& g, std::uint32_t self) {
    const auto& adj = g.adj_of(self).data;
    std::vector<double> da(r * c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) da[i * c + j] = adj[j * r + i];
    g.accumulate(a.idx, da);
  };
  return push(std::move(out), grad(a), bp);
}

Value Graph::softmax_rows(Value a) {
  const Tensor& ta = value(a);
  require_matrix(ta, "softmax_rows");
  std::size_t rows = ta.rows(), cols = ta.cols();
  Tensor out = Tensor::zeros({rows, cols});
  for (std::size_t r = 0; r < rows; ++r) {
    double mx = kNegInf;
    for (std::size_t c = 0; c < cols; ++c) mx = std::max(mx, ta.data[r * cols + c]);
    double sum = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      double e = std::exp(ta.data[r * cols + c] - mx);
      out.data[r * cols + c] = e;
      sum += e;
    }
    for (std::size_t c = 0; c < cols; ++c) out.data[r * cols + c] /= sum;
  }
  auto bp = [a, rows, cols](Graph& g, std::uint32_t self) {
    const auto& adj = g.adj_of(self).data;
    const auto& y = g.value(Value{self}).data;
    std::vector<double> da(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < cols; ++c) dot += adj[r * cols + c] * y[r * cols + c];
      for (std::size_t c = 0; c < cols; ++c)
        da[r * cols + c] = y[r * cols + c] * (adj[r * cols + c] - dot);
    }
    g.accumulate(a.idx, da);
  };
  return push(std::move(out), grad(a), bp);
}

Value Graph::log_softmax_rows(Value a) {
  const Tensor& ta = value(a);
  require_matrix(ta, "log_softmax_rows");
  std::size_t rows = ta.rows(), cols = ta.cols();
  Tensor out = Tensor::zeros({rows, cols});
  for (std::size_t r = 0; r < rows; ++r) {
    double mx = kNegInf;
    for (std::size_t c = 0; c < cols; ++c) mx = std::max(mx, ta.data[r * cols + c]);
    double sum = 0.0;
    for (std::size_t c = 0; c < cols; ++c) sum += std::exp(ta.data[r * cols + c] - mx);
    double lse = mx + std::log(sum);
    for (std::size_t c = 0; c < cols; ++c) out.data[r * cols + c] = ta.data[r * cols + c] - lse;
  }
  auto bp = [a, rows, cols](Graph& g, std::uint32_t self) {
    const auto& adj = g.adj_of(self).data;
    const auto& y = g.value(Value{self}).data;  // log-probs; softmax = exp(y)
    std::vector<double> da(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
      double sum = 0.0;
      for (std::size_t c = 0; c < cols; ++c) sum += adj[r * cols + c];
      for (std::size_t c = 0; c < cols; ++c)
        da[r * cols + c] = adj[r * cols + c] - std::exp(y[r * cols + c]) * sum;
    }
    g.accumulate(a.idx, da);
  };
  return push(std::move(out), grad(a), bp);
}

Value Graph::layer_norm_rows(Value x, Value gain, Value bias, double eps) {
  const Tensor& tx = value(x);
  const Tensor& tg = value(gain);
  const Tensor& tb = value(bias);
  require_matrix(tx, "layer_norm_rows");
  require_vector(tg, "layer_norm_rows");
  require_vector(tb, "layer_norm_rows");
  std::size_t rows = tx.rows(), cols = tx.cols();
  if (tg.size() != cols || tb.size() != cols) {
    throw ConfigError("layer_norm_rows: shape mismatch " + tx.shape_str() + " vs gain " +
                      tg.shape_str() + " / bias " + tb.shape_str());
  }
  Tensor out = Tensor::zeros({rows, cols});
  // x_hat and 1/sigma are cached for the backward pass.
  auto xhat = std::make_shared<std::vector<double>>(rows * cols);
  auto inv_sigma = std::make_shared<std::vector<double>>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    double mean = 0.0;
    for (std::size_t c = 0; c < cols; ++c) mean += tx.data[r * cols + c];
    mean /= static_cast<double>(cols);
    double var = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      double d = tx.data[r * cols + c] - mean;
      var += d * d;
    }
    var /= static_cast<double>(cols);
    double is = 1.0 / std::sqrt(var + eps);
    (*inv_sigma)[r] = is;
    for (std::size_t c = 0; c < cols; ++c) {
      double xh = (tx.data[r * cols + c] - mean) * is;
      (*xhat)[r * cols + c] = xh;
      out.data[r * cols + c] = tg.data[c] * xh + tb.data[c];
    }
  }
  auto bp = [x, gain, bias, rows, cols, xhat, inv_sigma](Graph& g, std::uint32_t self) {
    const auto& adj = g.adj_of(self).data;
    const auto& vg = g.value(gain).data;
    if (g.grad(gain)) {
      std::vector<double> dg(cols, 0.0);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) dg[c] += adj[r * cols + c] * (*xhat)[r * cols + c];
      g.accumulate(gain.idx, dg);
    }
    if (g.grad(bias)) {
      std::vector<double> db(cols, 0.0);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) db[c] += adj[r * cols + c];
      g.accumulate(bias.idx, db);
    }
    if (g.grad(x)) {
      std::vector<double> dx(rows * cols);
      for (std::size_t r = 0; r < rows; ++r) {
        double mean_h = 0.0, mean_hx = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
          double h = adj[r * cols + c] * vg[c];
          mean_h += h;
          mean_hx += h * (*xhat)[r * cols + c];
        }
        mean_h /= static_cast<double>(cols);
        mean_hx /= static_cast<double>(cols);
        for (std::size_t c = 0; c < cols; ++c) {
          double h = adj[r * cols + c] * vg[c];
          dx[r * cols + c] =
              (*inv_sigma)[r] * (h - mean_h - (*xhat)[r * cols + c] * mean_hx);
        }
      }
      g.accumulate(x.idx, dx);
    }
  };
  return push(std::move(out), grad(x) || grad(gain) || grad(bias), bp);
}

Value Graph::gelu(Value a) {
  const Tensor& ta = value(a);
  Tensor out = ta;
  for (double& v : out.data) v = 0.5 * v * (1.0 + std::erf(v / M_SQRT2));
  auto bp = [a](Graph& g, std::uint32_t self) {
    const auto& adj = g.adj_of(self).data;
    const auto& x = g.value(a).data;
    std::vector<double> da(adj.size());
    constexpr double inv_sqrt_2pi = 0.3989422804014327;
    for (std::size_t i = 0; i < adj.size(); ++i) {
      double phi = 0.5 * (1.0 + std::erf(x[i] / M_SQRT2));
      double pdf = inv_sqrt_2pi * std::exp(-0.5 * x[i] * x[i]);
      da[i] = adj[i] * (phi + x[i] * pdf);
    }
    g.accumulate(a.idx, da);
  };
  return push(std::move(out), grad(a), bp);
}

Value Graph::log_clamped(Value a, double floor) {
  const Tensor& ta = value(a);
  Tensor out = ta;
  for (double& v : out.data) v = std::log(std::max(v, floor));
  auto bp = [a, floor](Graph& g, std::uint32_t self) {
    const auto& adj = g.adj_of(self).data;
    const auto& x = g.value(a).data;
    std::vector<double> da(adj.size());
    for (std::size_t i = 0; i < adj.size(); ++i)
      da[i] = x[i] >= floor ? adj[i] / x[i] : 0.0;
    g.accumulate(a.idx, da);
  };
  return push(std::move(out), grad(a), bp);
}

Value Graph::logaddexp(Value a, Value b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  require_same_shape(ta, tb, "logaddexp");
  Tensor out = ta;
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    double x = ta.data[i], y = tb.data[i];
    double mx = std::max(x, y);
    out.data[i] = mx == kNegInf ? kNegInf : mx + std::log(std::exp(x - mx) + std::exp(y - mx));
  }
  auto bp = [a, b](Graph& g, std::uint32_t self) {
    const auto& adj = g.adj_of(self).data;
    const auto& o = g.value(Value{self}).data;
    const auto& x = g.value(a).data;
    const auto& y = g.value(b).data;
    std::vector<double> da(adj.size()), db(adj.size());
    for (std::size_t i = 0; i < adj.size(); ++i) {
      if (o[i] == kNegInf) {
        da[i] = db[i] = 0.0;
      } else {
        da[i] = x[i] == kNegInf ? 0.0 : adj[i] * std::exp(x[i] - o[i]);
        db[i] = y[i] == kNegInf ? 0.0 : adj[i] * std::exp(y[i] - o[i]);
      }
    }
    g.accumulate(a.idx, da);
    g.accumulate(b.idx, db);
  };
  return push(std::move(out), grad(a) || grad(b), bp);
}

Value Graph::sum_all(Value a) {
  const Tensor& ta = value(a);
  double s = 0.0;
  for (double v : ta.data) s += v;
  auto bp = [a](Graph& g, std::uint32_t self) {
    double gv = g.adj_of(self).data[0];
    std::vector<double> da(g.value(a).size(), gv);
    g.accumulate(a.idx, da);
  };
  return push(Tensor::scalar(s), grad(a), bp);
}

Value Graph::mean_all(Value a) {
  const Tensor& ta = value(a);
  double s = 0.0;
  for (double v : ta.data) s += v;
  std::size_t n = ta.size();
  auto bp = [a, n](Graph& g, std::uint32_t self) {
    double gv = g.adj_of(self).data[0] / static_cast<double>(n);
    std::vector<double> da(n, gv);
    g.accumulate(a.idx, da);
  };
  return push(Tensor::scalar(s / static_cast<double>(n)), grad(a), bp);
}

Value Graph::mean_rows(Value a) {
  const Tensor& ta = value(a);
  require_matrix(ta, "mean_rows");
  std::size_t rows = ta.rows(), cols = ta.cols();
  Tensor out = Tensor::zeros({cols});
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out.data[c] += ta.data[r * cols + c];
  for (double& v : out.data) v /= static_cast<double>(rows);
  auto bp = [a, rows, cols](Graph& g, std::uint32_t self) {
    const auto& adj = g.adj_of(self).data;
    std::vector<double> da(rows * cols);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c)
        da[r * cols + c] = adj[c] / static_cast<double>(rows);
    g.accumulate(a.idx, da);
  };
  return push(std::move(out), grad(a), bp);
}

Value Graph::squared_l2(Value a) {
  const Tensor& ta = value(a);
  double s = 0.0;
  for (double v : ta.data) s += v * v;
  auto bp = [a](Graph& g, std::uint32_t self) {
    double gv = g.adj_of(self).data[0];
    const auto& x = g.value(a).data;
    std::vector<double> da(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) da[i] = 2.0 * x[i] * gv;
    g.accumulate(a.idx, da);
  };
  return push(Tensor::scalar(s), grad(a), bp);
}

Value Graph::slice_cols(Value a, std::size_t c0, std::size_t n) {
  const Tensor& ta = value(a);
  require_matrix(ta, "slice_cols");
  std::size_t rows = ta.rows(), cols = ta.cols();
  if (c0 + n > cols) throw ContractViolation("slice_cols out of range on " + ta.shape_str());
  Tensor out = Tensor::zeros({rows, n});
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < n; ++c) out.data[r * n + c] = ta.data[r * cols + c0 + c];
  auto bp = [a, c0, n, rows, cols](Graph& g, std::uint32_t self) {
    const auto& adj = g.adj_of(self).data;
    std::vector<double> da(rows * cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < n; ++c) da[r * cols + c0 + c] = adj[r * n + c];
    g.accumulate(a.idx, da);
  };
  return push(std::move(out), grad(a), bp);
}

Value Graph::concat_cols(const std::vector<Value>& parts) {
  if (parts.empty()) throw ContractViolation("concat_cols: no parts");
  std::size_t rows = value(parts[0]).rows();
  std::size_t total = 0;
  bool rg = false;
  for (Value p : parts) {
    const Tensor& t = value(p);
    require_matrix(t, "concat_cols");
    if (t.rows() != rows) {
      throw ConfigError("concat_cols: row mismatch " + t.shape_str() + " vs " +
                        value(parts[0]).shape_str());
    }
    total += t.cols();
    rg = rg || grad(p);
  }
  Tensor out = Tensor::zeros({rows, total});
  std::size_t off = 0;
  for (Value p : parts) {
    const Tensor& t = value(p);
    std::size_t c = t.cols();
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t j = 0; j < c; ++j) out.data[r * total + off + j] = t.data[r * c + j];
    off += c;
  }
  auto parts_copy = parts;
  auto bp = [parts_copy, rows, total](Graph& g, std::uint32_t self) {
    const auto& adj = g.adj_of(self).data;
    std::size_t off = 0;
    for (Value p : parts_copy) {
      std::size_t c = g.value(p).cols();
      std::vector<double> dp(rows * c);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < c; ++j) dp[r * c + j] = adj[r * total + off + j];
      g.accumulate(p.idx, dp);
      off += c;
    }
  };
  return push(std::move(out), rg, bp);
}

Value Graph::row(Value a, std::size_t r) {
  const Tensor& ta = value(a);
  require_matrix(ta, "row");
  std::size_t rows = ta.rows(), cols = ta.cols();
  if (r >= rows) throw ContractViolation("row index out of range on " + ta.shape_str());
  Tensor out = Tensor::zeros({cols});
  for (std::size_t c = 0; c < cols; ++c) out.data[c] = ta.data[r * cols + c];
  auto bp = [a, r, rows, cols](Graph& g, std::uint32_t self) {
    const auto& adj = g.adj_of(self).data;
    std::vector<double> da(rows * cols, 0.0);
    for (std::size_t c = 0; c < cols; ++c) da[r * cols + c] = adj[c];
    g.accumulate(a.idx, da);
  };
  return push(std::move(out), grad(a), bp);
}

Value Graph::gather(Value v, std::vector<std::size_t> idx) {
  const Tensor& tv = value(v);
  require_vector(tv, "gather");
  Tensor out = Tensor::zeros({idx.size()});
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= tv.size()) throw ContractViolation("gather index out of range");
    out.data[i] = tv.data[idx[i]];
  }
  std::size_t src_n = tv.size();
  auto bp = [v, idx, src_n](Graph& g, std::uint32_t self) {
    const auto& adj = g.adj_of(self).data;
    std::vector<double> dv(src_n, 0.0);
    for (std::size_t i = 0; i < idx.size(); ++i) dv[idx[i]] += adj[i];
    g.accumulate(v.idx, dv);
  };
  return push(std::move(out), grad(v), bp);
}

Value Graph::shift_right(Value v, std::size_t k, double fill) {
  const Tensor& tv = value(v);
  require_vector(tv, "shift_right");
  std::size_t n = tv.size();
  Tensor out = Tensor::full({n}, fill);
  for (std::size_t i = k; i < n; ++i) out.data[i] = tv.data[i - k];
  auto bp = [v, k, n](Graph& g, std::uint32_t self) {
    const auto& adj = g.adj_of(self).data;
    std::vector<double> dv(n, 0.0);
    for (std::size_t i = k; i < n; ++i) dv[i - k] += adj[i];
    g.accumulate(v.idx, dv);
  };
  return push(std::move(out), grad(v), bp);
}

Value Graph::pick(Value v, std::size_t i) {
  const Tensor& tv = value(v);
  require_vector(tv, "pick");
  if (i >= tv.size()) throw ContractViolation("pick index out of range");
  std::size_t n = tv.size();
  auto bp = [v, i, n](Graph& g, std::uint32_t self) {
    std::vector<double> dv(n, 0.0);
    dv[i] = g.adj_of(self).data[0];
    g.accumulate(v.idx, dv);
  };
  return push(Tensor::scalar(tv.data[i]), grad(v), bp);
}

}  // namespace fedreg
