// SPDX-License-Identifier: Apache-2.0
#include "odn/training.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "odn/binary_io.hpp"
#include "odn/random.hpp"

namespace odn {

std::string to_string(OptimizerKind k) { return k == OptimizerKind::adam ? "adam" : "adamw"; }

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "adam") return OptimizerKind::adam;
  if (name == "adamw") return OptimizerKind::adamw;
  throw ConfigError("unknown optimizer '" + name + "'");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(lr0 >= 0.0)) throw ConfigError("learning rate must be nonnegative");
  if (decay_rate < 0.0) throw ConfigError("decay rate must be nonnegative");
  if (weight_decay < 0.0) throw ConfigError("weight decay must be nonnegative");
}

std::size_t TrainConfig::resolved_decay_steps() const {
  return decay_steps > 0 ? decay_steps : std::max<std::size_t>(1, epochs / 5);
}

double TrainReport::mean_epoch_seconds() const {
  if (seconds.empty()) return 0.0;
  return std::accumulate(seconds.begin(), seconds.end(), 0.0) /
         static_cast<double>(seconds.size());
}

void TrainReport::write_csv(std::ostream& os) const {
  os << "epoch,loss,lr,seconds\n";
  char line[160];
  for (std::size_t e = 0; e < loss.size(); ++e) {
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.9g\n", e, loss[e], lr[e], seconds[e]);
    os << line;
  }
}

Tensor mse_loss(const Tensor& pred, const Tensor& target) {
  if (pred.shape() != target.shape()) {
    throw DimensionError("mse_loss: prediction " + shape_string(pred.shape()) +
                         " vs target " + shape_string(target.shape()));
  }
  const Tensor diff = sub(pred, target);
  return mean(mul(diff, diff));
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               std::size_t t, double lr, const AdamHyper& hyper) {
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (grads.size() != params.size() || state.m.size() != params.size()) {
    throw DimensionError("adam_step: parameter, gradient and state sizes differ");
  }
  const double c1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = hyper.beta1 * state.m[i] + (1.0 - hyper.beta1) * grads[i];
    state.v[i] = hyper.beta2 * state.v[i] + (1.0 - hyper.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + hyper.eps);
  }
}

void adamw_step(std::span<double> params, std::span<const double> grads, AdamState& state,
                std::size_t t, double lr, double weight_decay, const AdamHyper& hyper) {
  // Decay uses the pre-update weights, as in the decoupled formulation.
  std::vector<double> before(params.begin(), params.end());
  adam_step(params, grads, state, t, lr, hyper);
  if (weight_decay == 0.0) return;
  for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * weight_decay * before[i];
}

double inverse_time_lr(double lr0, double gamma, std::size_t s, std::size_t step) {
  if (s == 0) throw DomainError("inverse_time_lr: decay step must be >= 1");
  return lr0 / (1.0 + gamma * std::floor(static_cast<double>(step / s)));
}

Optimizer::Optimizer(std::vector<Parameter> params, OptimizerKind kind, double weight_decay,
                     AdamHyper hyper)
    : params_(std::move(params)),
      state_(params_.size()),
      counts_(params_.size(), 0),
      kind_(kind),
      weight_decay_(weight_decay),
      hyper_(hyper) {}

void Optimizer::step(double lr) {
  ++t_;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Parameter& p = params_[i];
    if (!p.tensor.has_grad()) continue;
    const std::size_t t = ++counts_[i];
    auto data = p.tensor.mutable_data();
    if (kind_ == OptimizerKind::adamw && p.decay) {
      adamw_step(data, p.tensor.grad(), state_[i], t, lr, weight_decay_, hyper_);
    } else {
      adam_step(data, p.tensor.grad(), state_[i], t, lr, hyper_);
    }
  }
}

void Optimizer::zero_grad() {
  for (auto& p : params_) p.tensor.zero_grad();
}

std::string parameter_hash(const EnsembleModel& model) {
  ByteWriter w;
  for (const auto& p : model.parameters()) {
    w.put_bytes(p.name);
    w.put_f64_array(p.tensor.data());
  }
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08x", crc32(w.bytes()));
  return buf;
}

TrainReport train(EnsembleModel& model, const OperatorDataset& data, const TrainConfig& cfg,
                  const EpochCallback& on_epoch, TrainReport* partial) {
  cfg.validate();
  if (data.components != 1) {
    throw DimensionError("training supports scalar output functions only (dataset has c=" +
                         std::to_string(data.components) + ")");
  }
  if (data.n_x() != model.input_width()) {
    throw DimensionError("dataset N_x=" + std::to_string(data.n_x()) +
                         " differs from branch input width " +
                         std::to_string(model.input_width()));
  }
  const std::size_t n_train = data.n_train(data.size());
  if (n_train == 0) throw DimensionError("training split is empty");

  Optimizer opt(model.parameters(), cfg.optimizer, cfg.weight_decay, cfg.adam);
  const std::size_t s = cfg.resolved_decay_steps();
  const std::size_t batch = cfg.batch_size == 0 ? n_train : std::min(cfg.batch_size, n_train);
  Rng shuffle_rng(cfg.seed);
  std::vector<std::size_t> order(n_train);
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainReport report;
  Tape tape;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const double lr = inverse_time_lr(cfg.lr0, cfg.decay_rate, s, epoch);
    if (batch < n_train) {
      for (std::size_t i = n_train; i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    }
    double epoch_loss = 0.0;
    std::size_t seen = 0;
    for (std::size_t first = 0; first < n_train; first += batch) {
      const std::size_t count = std::min(batch, n_train - first);
      std::span<const std::size_t> idx(order.data() + first, count);
      const Matrix U = data.U.select_rows(idx);
      const Tensor target = Tensor::from_matrix(data.V.select_rows(idx));
      tape.clear();
      double value = 0.0;
      {
        TapeGuard guard(tape);
        const Tensor loss = mse_loss(model.predict(U, data.Y), target);
        value = loss.item();
        if (!std::isfinite(value)) {
          if (partial) *partial = report;
          throw NumericError("loss became non-finite at epoch " + std::to_string(epoch));
        }
        tape.backward(loss);
      }
      opt.step(lr);
      opt.zero_grad();
      epoch_loss += value * static_cast<double>(count);
      seen += count;
    }
    tape.clear();
    epoch_loss /= static_cast<double>(seen);
    const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
    report.loss.push_back(epoch_loss);
    report.lr.push_back(lr);
    report.seconds.push_back(took.count());
    if (on_epoch) on_epoch(epoch, epoch_loss, lr);
  }
  report.snapshot_id = parameter_hash(model);
  if (partial) *partial = report;
  return report;
}

}  // namespace odn
