// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "odn/tensor.hpp"

namespace odn {

enum class Activation { relu, leaky_relu, tanh };

std::string to_string(Activation a);
Activation parse_activation(const std::string& name);

struct MLPConfig {
  std::size_t input_dim = 1;
  std::vector<std::size_t> hidden_widths;
  std::size_t output_dim = 1;
  Activation activation = Activation::relu;
  bool activate_last_layer = false;

  void validate() const;
  /// Sum over layers of (fan_in + 1) * fan_out.
  std::size_t parameter_count() const;

  friend bool operator==(const MLPConfig&, const MLPConfig&) = default;
};

struct DenseLayer {
  Tensor weight;  // fan_in x fan_out
  Tensor bias;    // 1 x fan_out
};

/// A trainable parameter together with the name used in checkpoints.
struct Parameter {
  std::string name;
  Tensor tensor;
  bool decay = true;  // decoupled weight decay applies (weights yes, biases no)
};

class MLP {
 public:
  MLP() = default;
  explicit MLP(MLPConfig cfg);  // zero weights and biases

  const MLPConfig& config() const { return cfg_; }
  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::size_t parameter_count() const { return cfg_.parameter_count(); }

  /// Batched forward pass over rows of x (B x input_dim).
  Tensor forward(const Tensor& x) const;

  void collect_parameters(const std::string& prefix, std::vector<Parameter>& out) const;

  /// Copy with independent parameter storage.
  MLP clone() const;

 private:
  MLPConfig cfg_;
  std::vector<DenseLayer> layers_;
};

/// Glorot-uniform weights, zero biases, deterministic in `seed`.
MLP init_mlp(const MLPConfig& cfg, std::uint64_t seed);

Tensor activate(const Tensor& x, Activation a);

}  // namespace odn
