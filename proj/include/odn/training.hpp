// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "odn/dataset.hpp"
#include "odn/trunks.hpp"

namespace odn {

enum class OptimizerKind { adam, adamw };

std::string to_string(OptimizerKind k);
OptimizerKind parse_optimizer(const std::string& name);

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainConfig {
  std::size_t epochs = 5000;
  std::size_t batch_size = 0;  // functions per step; 0 = full batch
  double lr0 = 1e-3;
  double decay_rate = 0.5;     // gamma of the inverse-time schedule
  std::size_t decay_steps = 0; // 0 = max(1, epochs / 5)
  OptimizerKind optimizer = OptimizerKind::adam;
  double weight_decay = 1e-4;  // AdamW only
  AdamHyper adam;
  std::uint64_t seed = 0;      // mini-batch shuffling

  void validate() const;
  std::size_t resolved_decay_steps() const;
};

struct TrainReport {
  std::vector<double> loss;     // per epoch
  std::vector<double> lr;       // per epoch
  std::vector<double> seconds;  // wall clock per epoch
  std::string snapshot_id;      // CRC32 of final parameters, hex

  double mean_epoch_seconds() const;
  void write_csv(std::ostream& os) const;
};

/// Mean over all entries of (pred - target)^2.
Tensor mse_loss(const Tensor& pred, const Tensor& target);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
};

/// One bias-corrected Adam update at step t >= 1.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               std::size_t t, double lr, const AdamHyper& hyper = {});

/// Adam followed by decoupled decay w <- w - lr * lambda * w.
void adamw_step(std::span<double> params, std::span<const double> grads, AdamState& state,
                std::size_t t, double lr, double weight_decay, const AdamHyper& hyper = {});

/// lr0 / (1 + gamma * floor(step / s)).
double inverse_time_lr(double lr0, double gamma, std::size_t s, std::size_t step);

/// Holds per-parameter moment buffers. Parameters that received no gradient
/// since the last step are left untouched.
class Optimizer {
 public:
  Optimizer(std::vector<Parameter> params, OptimizerKind kind, double weight_decay,
            AdamHyper hyper);
  void step(double lr);
  void zero_grad();
  std::size_t steps() const { return t_; }

 private:
  std::vector<Parameter> params_;
  std::vector<AdamState> state_;
  std::vector<std::size_t> counts_;
  OptimizerKind kind_;
  double weight_decay_;
  AdamHyper hyper_;
  std::size_t t_ = 0;
};

/// Hex CRC32 over all parameter values of a model.
std::string parameter_hash(const EnsembleModel& model);

using EpochCallback = std::function<void(std::size_t epoch, double loss, double lr)>;

/// Full-batch (or function-mini-batch) training on the first `n_train`
/// samples of `data`. Throws NumericError naming the epoch if the loss stops
/// being finite; the partial history is then available via `partial`.
TrainReport train(EnsembleModel& model, const OperatorDataset& data, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {}, TrainReport* partial = nullptr);

}  // namespace odn
