// SPDX-License-Identifier: Apache-2.0
//
// Dense double-precision tensors with tape-based reverse-mode differentiation.
//
// A Tensor is a cheap handle onto shared storage. Operations record onto the
// Tape that is active on the calling thread (see TapeGuard) whenever at least
// one operand requires a gradient; otherwise they are plain eager kernels.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "odn/matrix.hpp"

namespace odn {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);

namespace detail {
struct Node {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until a gradient arrives
  bool requires_grad = false;
  bool produced_by_op = false;
  std::uint64_t id = 0;
};
struct Access;
}  // namespace detail

class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  /// Copies a Matrix into a rows x cols tensor.
  static Tensor from_matrix(const Matrix& m, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t size() const { return node_->data.size(); }
  /// Leading extent of a rank-2 tensor.
  std::size_t rows() const;
  /// Trailing extent of a rank-2 tensor.
  std::size_t cols() const;

  std::span<const double> data() const { return node_->data; }
  /// Raw access for optimizers and deserialization. Does not record.
  std::span<double> mutable_data() { return node_->data; }
  double item() const;
  double at(std::size_t i, std::size_t j) const { return node_->data[i * cols() + j]; }
  Matrix to_matrix() const;

  bool requires_grad() const { return node_->requires_grad; }
  bool has_grad() const { return !node_->grad.empty(); }
  std::span<const double> grad() const { return node_->grad; }
  void zero_grad() { node_->grad.clear(); }

  std::uint64_t id() const { return node_->id; }
  bool same_storage(const Tensor& other) const { return node_ == other.node_; }

  /// Deep copy that does not share storage and carries no gradient.
  Tensor clone(bool requires_grad = false) const;

 private:
  friend struct detail::Access;

  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;
};

/// Ordered record of differentiable operations. Entries are appended in
/// execution order, so the list is already topologically sorted.
class Tape {
 public:
  using BackwardFn = std::function<void(std::span<const double> grad_out)>;

  void record(const Tensor& output, std::vector<Tensor> inputs, BackwardFn backward);

  /// Reverse sweep from a scalar loss. Leaf gradients accumulate across calls;
  /// intermediate gradients are reset at the start of each sweep.
  void backward(const Tensor& loss);

  std::size_t size() const { return entries_.size(); }
  void clear() { entries_.clear(); }

 private:
  struct Entry {
    Tensor output;
    std::vector<Tensor> inputs;
    BackwardFn backward;
  };
  std::vector<Entry> entries_;
};

/// Makes a tape the recording target for the current thread for the guard's
/// lifetime. Guards nest; the previous tape is restored on destruction.
class TapeGuard {
 public:
  explicit TapeGuard(Tape& tape);
  ~TapeGuard();
  TapeGuard(const TapeGuard&) = delete;
  TapeGuard& operator=(const TapeGuard&) = delete;

 private:
  Tape* previous_;
};

/// Tape active on this thread, or nullptr.
Tape* active_tape();

void backward(Tape& tape, const Tensor& loss);

// -- operations --------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
/// Adds a length-n bias (shape {n} or {1,n}) to every row of a B x n tensor.
Tensor add_bias(const Tensor& a, const Tensor& bias);
/// Adds a single-element tensor to every entry.
Tensor add_scalar(const Tensor& a, const Tensor& s);

inline constexpr double kLeakyReluSlope = 0.01;

Tensor relu(const Tensor& a);
Tensor leaky_relu(const Tensor& a, double alpha = kLeakyReluSlope);
Tensor tanh(const Tensor& a);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

/// Column-wise concatenation of rank-2 tensors with equal row counts.
Tensor concat_cols(std::span<const Tensor> parts);
Tensor gather_rows(const Tensor& a, std::span<const std::size_t> rows);
/// Places row r of `a` at row rows[r] of an n_rows x cols zero tensor.
Tensor scatter_rows(const Tensor& a, std::span<const std::size_t> rows, std::size_t n_rows);
/// Multiplies row i by the constant weights[i].
Tensor scale_rows(const Tensor& a, std::span<const double> weights);

}  // namespace odn
