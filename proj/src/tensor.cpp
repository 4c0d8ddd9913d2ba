// SPDX-License-Identifier: Apache-2.0
#include "odn/tensor.hpp"

#include <Eigen/Core>

#include <atomic>
#include <cmath>
#include <numeric>
#include <sstream>

namespace odn {

namespace detail {

struct Access {
  static Tensor make(Shape shape, std::vector<double> data, bool requires_grad,
                     bool produced_by_op) {
    static std::atomic<std::uint64_t> next_id{1};
    auto node = std::make_shared<Node>();
    node->shape = std::move(shape);
    node->data = std::move(data);
    node->requires_grad = requires_grad;
    node->produced_by_op = produced_by_op;
    node->id = next_id.fetch_add(1, std::memory_order_relaxed);
    return Tensor(std::move(node));
  }
  static Node& node(const Tensor& t) { return *t.node_; }
};

}  // namespace detail

namespace {

using detail::Access;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

thread_local Tape* g_active_tape = nullptr;

std::size_t shape_product(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

void check_shape(const Shape& shape) {
  if (shape.empty()) throw DimensionError("tensor shape must have at least one extent");
  for (auto e : shape) {
    if (e == 0) throw DimensionError("tensor extents must be positive: " + shape_string(shape));
  }
}

void require_defined(const Tensor& t, const char* op) {
  if (!t.defined()) throw GraphError(std::string(op) + ": undefined tensor operand");
}

void require_rank2(const Tensor& t, const char* op) {
  require_defined(t, op);
  if (t.rank() != 2) {
    throw DimensionError(std::string(op) + ": expected a rank-2 tensor, got " +
                         shape_string(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  require_defined(a, op);
  require_defined(b, op);
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) +
                         " vs " + shape_string(b.shape()));
  }
}

// Gradient accumulation into any tensor that wants one.
void accumulate(const Tensor& t, std::span<const double> g) {
  if (!t.requires_grad()) return;
  auto& grad = Access::node(t).grad;
  if (grad.empty()) {
    grad.assign(g.begin(), g.end());
  } else {
    for (std::size_t i = 0; i < g.size(); ++i) grad[i] += g[i];
  }
}

bool any_requires_grad(std::initializer_list<const Tensor*> inputs) {
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

// Creates an op result; it participates in differentiation iff a tape is
// active and some input does.
Tensor result(Shape shape, std::vector<double> data,
              std::initializer_list<const Tensor*> inputs) {
  const bool rg = g_active_tape != nullptr && any_requires_grad(inputs);
  return Access::make(std::move(shape), std::move(data), rg, rg);
}

void record(const Tensor& out, std::vector<Tensor> inputs, Tape::BackwardFn fn) {
  if (out.requires_grad()) g_active_tape->record(out, std::move(inputs), std::move(fn));
}

template <typename F>
Tensor unary_map(const Tensor& a, F&& f, const char* op) {
  require_defined(a, op);
  std::vector<double> out(a.size());
  auto in = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(in[i]);
  return result(a.shape(), std::move(out), {&a});
}

}  // namespace

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

// -- Tensor ------------------------------------------------------------------

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  check_shape(shape);
  const std::size_t n = shape_product(shape);
  return Access::make(std::move(shape), std::vector<double>(n, value), requires_grad, false);
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  check_shape(shape);
  if (shape_product(shape) != values.size()) {
    throw DimensionError("Tensor::from: " + std::to_string(values.size()) +
                         " values do not fill shape " + shape_string(shape));
  }
  return Access::make(std::move(shape), std::move(values), requires_grad, false);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from({1}, {value}, requires_grad);
}

Tensor Tensor::from_matrix(const Matrix& m, bool requires_grad) {
  return from({m.rows, m.cols}, m.data, requires_grad);
}

std::size_t Tensor::rows() const {
  if (rank() != 2) throw DimensionError("rows() on non-matrix tensor " + shape_string(shape()));
  return node_->shape[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) throw DimensionError("cols() on non-matrix tensor " + shape_string(shape()));
  return node_->shape[1];
}

double Tensor::item() const {
  if (size() != 1) throw DimensionError("item() on tensor of shape " + shape_string(shape()));
  return node_->data[0];
}

Matrix Tensor::to_matrix() const { return Matrix(rows(), cols(), node_->data); }

Tensor Tensor::clone(bool requires_grad) const {
  return Access::make(node_->shape, node_->data, requires_grad, false);
}

// -- Tape --------------------------------------------------------------------

void Tape::record(const Tensor& output, std::vector<Tensor> inputs, BackwardFn backward) {
  entries_.push_back(Entry{output, std::move(inputs), std::move(backward)});
}

void Tape::backward(const Tensor& loss) {
  if (!loss.defined()) throw GraphError("backward: undefined loss");
  if (loss.size() != 1) {
    throw GraphError("backward: loss must be scalar, got shape " + shape_string(loss.shape()));
  }
  std::size_t last = entries_.size();
  for (std::size_t i = entries_.size(); i-- > 0;) {
    if (entries_[i].output.same_storage(loss)) {
      last = i;
      break;
    }
  }
  if (last == entries_.size()) {
    throw GraphError("backward: loss was not produced on this tape (detached graph)");
  }
  for (std::size_t i = 0; i <= last; ++i) {
    auto& node = Access::node(entries_[i].output);
    node.grad.assign(node.data.size(), 0.0);
  }
  Access::node(loss).grad[0] = 1.0;
  for (std::size_t i = last + 1; i-- > 0;) {
    const Entry& e = entries_[i];
    e.backward(Access::node(e.output).grad);
  }
}

TapeGuard::TapeGuard(Tape& tape) : previous_(g_active_tape) { g_active_tape = &tape; }
TapeGuard::~TapeGuard() { g_active_tape = previous_; }

Tape* active_tape() { return g_active_tape; }

void backward(Tape& tape, const Tensor& loss) { tape.backward(loss); }

// -- linear algebra ----------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw DimensionError("matmul: inner dimensions disagree " + shape_string(a.shape()) +
                         " * " + shape_string(b.shape()));
  }
  std::vector<double> out(m * n);
  MutMap(out.data(), m, n).noalias() =
      ConstMap(a.data().data(), m, k) * ConstMap(b.data().data(), k, n);
  Tensor r = result({m, n}, std::move(out), {&a, &b});
  record(r, {a, b}, [a, b, m, k, n](std::span<const double> g) {
    ConstMap gm(g.data(), m, n);
    if (a.requires_grad()) {
      std::vector<double> ga(m * k);
      MutMap(ga.data(), m, k).noalias() = gm * ConstMap(b.data().data(), k, n).transpose();
      accumulate(a, ga);
    }
    if (b.requires_grad()) {
      std::vector<double> gb(k * n);
      MutMap(gb.data(), k, n).noalias() = ConstMap(a.data().data(), m, k).transpose() * gm;
      accumulate(b, gb);
    }
  });
  return r;
}

Tensor transpose(const Tensor& a) {
  require_rank2(a, "transpose");
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<double> out(m * n);
  MutMap(out.data(), n, m) = ConstMap(a.data().data(), m, n).transpose();
  Tensor r = result({n, m}, std::move(out), {&a});
  record(r, {a}, [a, m, n](std::span<const double> g) {
    std::vector<double> ga(m * n);
    MutMap(ga.data(), m, n) = ConstMap(g.data(), n, m).transpose();
    accumulate(a, ga);
  });
  return r;
}

// -- elementwise -------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  Tensor r = result(a.shape(), std::move(out), {&a, &b});
  record(r, {a, b}, [a, b](std::span<const double> g) {
    accumulate(a, g);
    accumulate(b, g);
  });
  return r;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] - b.data()[i];
  Tensor r = result(a.shape(), std::move(out), {&a, &b});
  record(r, {a, b}, [a, b](std::span<const double> g) {
    accumulate(a, g);
    if (b.requires_grad()) {
      std::vector<double> gb(g.begin(), g.end());
      for (auto& v : gb) v = -v;
      accumulate(b, gb);
    }
  });
  return r;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
  Tensor r = result(a.shape(), std::move(out), {&a, &b});
  record(r, {a, b}, [a, b](std::span<const double> g) {
    std::vector<double> tmp(g.size());
    if (a.requires_grad()) {
      for (std::size_t i = 0; i < g.size(); ++i) tmp[i] = g[i] * b.data()[i];
      accumulate(a, tmp);
    }
    if (b.requires_grad()) {
      for (std::size_t i = 0; i < g.size(); ++i) tmp[i] = g[i] * a.data()[i];
      accumulate(b, tmp);
    }
  });
  return r;
}

Tensor scale(const Tensor& a, double factor) {
  Tensor r = unary_map(a, [factor](double x) { return factor * x; }, "scale");
  record(r, {a}, [a, factor](std::span<const double> g) {
    std::vector<double> ga(g.begin(), g.end());
    for (auto& v : ga) v *= factor;
    accumulate(a, ga);
  });
  return r;
}

Tensor add_bias(const Tensor& a, const Tensor& bias) {
  require_rank2(a, "add_bias");
  require_defined(bias, "add_bias");
  const std::size_t m = a.rows(), n = a.cols();
  const bool ok = (bias.rank() == 1 && bias.shape()[0] == n) ||
                  (bias.rank() == 2 && bias.shape()[0] == 1 && bias.shape()[1] == n);
  if (!ok) {
    throw DimensionError("add_bias: bias " + shape_string(bias.shape()) +
                         " does not match rows of " + shape_string(a.shape()));
  }
  std::vector<double> out(a.data().begin(), a.data().end());
  auto bv = bias.data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] += bv[j];
  }
  Tensor r = result({m, n}, std::move(out), {&a, &bias});
  record(r, {a, bias}, [a, bias, m, n](std::span<const double> g) {
    accumulate(a, g);
    if (bias.requires_grad()) {
      std::vector<double> gb(n, 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) gb[j] += g[i * n + j];
      }
      accumulate(bias, gb);
    }
  });
  return r;
}

Tensor add_scalar(const Tensor& a, const Tensor& s) {
  require_defined(a, "add_scalar");
  require_defined(s, "add_scalar");
  if (s.size() != 1) {
    throw DimensionError("add_scalar: expected single-element tensor, got " +
                         shape_string(s.shape()));
  }
  const double v = s.item();
  std::vector<double> out(a.data().begin(), a.data().end());
  for (auto& x : out) x += v;
  Tensor r = result(a.shape(), std::move(out), {&a, &s});
  record(r, {a, s}, [a, s](std::span<const double> g) {
    accumulate(a, g);
    if (s.requires_grad()) {
      double total = 0.0;
      for (double x : g) total += x;
      accumulate(s, std::span<const double>(&total, 1));
    }
  });
  return r;
}

Tensor relu(const Tensor& a) {
  Tensor r = unary_map(a, [](double x) { return x > 0.0 ? x : 0.0; }, "relu");
  record(r, {a}, [a](std::span<const double> g) {
    std::vector<double> ga(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] = a.data()[i] > 0.0 ? g[i] : 0.0;
    accumulate(a, ga);
  });
  return r;
}

Tensor leaky_relu(const Tensor& a, double alpha) {
  Tensor r = unary_map(a, [alpha](double x) { return x > 0.0 ? x : alpha * x; }, "leaky_relu");
  record(r, {a}, [a, alpha](std::span<const double> g) {
    std::vector<double> ga(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] = a.data()[i] > 0.0 ? g[i] : alpha * g[i];
    accumulate(a, ga);
  });
  return r;
}

Tensor tanh(const Tensor& a) {
  Tensor r = unary_map(a, [](double x) { return std::tanh(x); }, "tanh");
  record(r, {a, r}, [a, r](std::span<const double> g) {
    std::vector<double> ga(g.size());
    auto y = r.data();
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] = g[i] * (1.0 - y[i] * y[i]);
    accumulate(a, ga);
  });
  return r;
}

// -- reductions --------------------------------------------------------------

Tensor sum(const Tensor& a) {
  require_defined(a, "sum");
  double total = 0.0;
  for (double x : a.data()) total += x;
  Tensor r = result({1}, {total}, {&a});
  record(r, {a}, [a](std::span<const double> g) {
    std::vector<double> ga(a.size(), g[0]);
    accumulate(a, ga);
  });
  return r;
}

Tensor mean(const Tensor& a) {
  require_defined(a, "mean");
  double total = 0.0;
  for (double x : a.data()) total += x;
  const double n = static_cast<double>(a.size());
  Tensor r = result({1}, {total / n}, {&a});
  record(r, {a}, [a, n](std::span<const double> g) {
    std::vector<double> ga(a.size(), g[0] / n);
    accumulate(a, ga);
  });
  return r;
}

// -- structural --------------------------------------------------------------

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no operands");
  const std::size_t m = parts[0].rows();
  std::size_t total = 0;
  bool rg = false;
  for (const auto& p : parts) {
    require_rank2(p, "concat_cols");
    if (p.rows() != m) {
      throw DimensionError("concat_cols: row count mismatch " + shape_string(parts[0].shape()) +
                           " vs " + shape_string(p.shape()));
    }
    total += p.cols();
    rg = rg || p.requires_grad();
  }
  std::vector<double> out(m * total);
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const std::size_t n = p.cols();
    for (std::size_t i = 0; i < m; ++i) {
      std::copy_n(p.data().begin() + static_cast<std::ptrdiff_t>(i * n), n,
                  out.begin() + static_cast<std::ptrdiff_t>(i * total + offset));
    }
    offset += n;
  }
  rg = rg && g_active_tape != nullptr;
  Tensor r = Access::make({m, total}, std::move(out), rg, rg);
  std::vector<Tensor> inputs(parts.begin(), parts.end());
  record(r, inputs, [inputs, m, total](std::span<const double> g) {
    std::size_t off = 0;
    for (const auto& p : inputs) {
      const std::size_t n = p.cols();
      if (p.requires_grad()) {
        std::vector<double> gp(m * n);
        for (std::size_t i = 0; i < m; ++i) {
          std::copy_n(g.begin() + static_cast<std::ptrdiff_t>(i * total + off), n,
                      gp.begin() + static_cast<std::ptrdiff_t>(i * n));
        }
        accumulate(p, gp);
      }
      off += n;
    }
  });
  return r;
}

Tensor gather_rows(const Tensor& a, std::span<const std::size_t> rows) {
  require_rank2(a, "gather_rows");
  if (rows.empty()) throw DimensionError("gather_rows: empty row selection");
  const std::size_t n = a.cols(), m = a.rows();
  std::vector<double> out(rows.size() * n);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= m) throw IndexError("gather_rows: row index out of range");
    std::copy_n(a.data().begin() + static_cast<std::ptrdiff_t>(rows[r] * n), n,
                out.begin() + static_cast<std::ptrdiff_t>(r * n));
  }
  Tensor r = result({rows.size(), n}, std::move(out), {&a});
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  record(r, {a}, [a, idx = std::move(idx), n, m](std::span<const double> g) {
    std::vector<double> ga(m * n, 0.0);
    for (std::size_t r = 0; r < idx.size(); ++r) {
      for (std::size_t j = 0; j < n; ++j) ga[idx[r] * n + j] += g[r * n + j];
    }
    accumulate(a, ga);
  });
  return r;
}

Tensor scatter_rows(const Tensor& a, std::span<const std::size_t> rows, std::size_t n_rows) {
  require_rank2(a, "scatter_rows");
  if (rows.size() != a.rows()) {
    throw DimensionError("scatter_rows: index count does not match row count");
  }
  const std::size_t n = a.cols();
  std::vector<double> out(n_rows * n, 0.0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= n_rows) throw IndexError("scatter_rows: target row out of range");
    for (std::size_t j = 0; j < n; ++j) out[rows[r] * n + j] += a.data()[r * n + j];
  }
  Tensor r = result({n_rows, n}, std::move(out), {&a});
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  record(r, {a}, [a, idx = std::move(idx), n](std::span<const double> g) {
    std::vector<double> ga(idx.size() * n);
    for (std::size_t r = 0; r < idx.size(); ++r) {
      std::copy_n(g.begin() + static_cast<std::ptrdiff_t>(idx[r] * n), n,
                  ga.begin() + static_cast<std::ptrdiff_t>(r * n));
    }
    accumulate(a, ga);
  });
  return r;
}

Tensor scale_rows(const Tensor& a, std::span<const double> weights) {
  require_rank2(a, "scale_rows");
  if (weights.size() != a.rows()) {
    throw DimensionError("scale_rows: weight count does not match row count");
  }
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<double> out(a.data().begin(), a.data().end());
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] *= weights[i];
  }
  Tensor r = result({m, n}, std::move(out), {&a});
  std::vector<double> w(weights.begin(), weights.end());
  record(r, {a}, [a, w = std::move(w), m, n](std::span<const double> g) {
    std::vector<double> ga(m * n);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) ga[i * n + j] = g[i * n + j] * w[i];
    }
    accumulate(a, ga);
  });
  return r;
}

}  // namespace odn
