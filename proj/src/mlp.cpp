// SPDX-License-Identifier: Apache-2.0
#include "odn/mlp.hpp"

#include <cmath>

#include "odn/random.hpp"

namespace odn {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::leaky_relu: return "leaky_relu";
    case Activation::tanh: return "tanh";
  }
  return "?";
}

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "leaky_relu" || name == "leaky-relu") return Activation::leaky_relu;
  if (name == "tanh") return Activation::tanh;
  throw ConfigError("unknown activation '" + name + "'");
}

void MLPConfig::validate() const {
  if (input_dim == 0) throw ConfigError("MLP input_dim must be positive");
  if (output_dim == 0) throw ConfigError("MLP output_dim must be positive");
  if (hidden_widths.empty()) throw ConfigError("MLP needs at least one hidden layer");
  for (auto w : hidden_widths) {
    if (w == 0) throw ConfigError("MLP hidden widths must be positive");
  }
}

std::size_t MLPConfig::parameter_count() const {
  std::size_t total = 0;
  std::size_t fan_in = input_dim;
  for (auto w : hidden_widths) {
    total += (fan_in + 1) * w;
    fan_in = w;
  }
  return total + (fan_in + 1) * output_dim;
}

MLP::MLP(MLPConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  std::size_t fan_in = cfg_.input_dim;
  auto add_layer = [&](std::size_t fan_out) {
    layers_.push_back({Tensor::zeros({fan_in, fan_out}, true), Tensor::zeros({1, fan_out}, true)});
    fan_in = fan_out;
  };
  for (auto w : cfg_.hidden_widths) add_layer(w);
  add_layer(cfg_.output_dim);
}

Tensor activate(const Tensor& x, Activation a) {
  switch (a) {
    case Activation::relu: return relu(x);
    case Activation::leaky_relu: return leaky_relu(x);
    case Activation::tanh: return tanh(x);
  }
  return x;
}

Tensor MLP::forward(const Tensor& x) const {
  if (x.rank() != 2 || x.cols() != cfg_.input_dim) {
    throw DimensionError("MLP::forward: expected B x " + std::to_string(cfg_.input_dim) +
                         " input, got " + shape_string(x.shape()));
  }
  Tensor h = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    h = add_bias(matmul(h, layers_[l].weight), layers_[l].bias);
    const bool last = l + 1 == layers_.size();
    if (!last || cfg_.activate_last_layer) h = activate(h, cfg_.activation);
  }
  return h;
}

void MLP::collect_parameters(const std::string& prefix, std::vector<Parameter>& out) const {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const std::string base = prefix + ".layer" + std::to_string(l);
    out.push_back({base + ".weight", layers_[l].weight, true});
    out.push_back({base + ".bias", layers_[l].bias, false});
  }
}

MLP MLP::clone() const {
  MLP copy(cfg_);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    copy.layers_[l].weight = layers_[l].weight.clone(true);
    copy.layers_[l].bias = layers_[l].bias.clone(true);
  }
  return copy;
}

MLP init_mlp(const MLPConfig& cfg, std::uint64_t seed) {
  MLP net(cfg);
  Rng rng(seed);
  for (auto& layer : net.layers()) {
    const auto fan_in = static_cast<double>(layer.weight.rows());
    const auto fan_out = static_cast<double>(layer.weight.cols());
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    for (auto& w : layer.weight.mutable_data()) w = rng.uniform(-bound, bound);
  }
  return net;
}

}  // namespace odn
