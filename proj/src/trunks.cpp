// SPDX-License-Identifier: Apache-2.0
#include "odn/trunks.hpp"

#include <atomic>
#include <future>
#include <string>

#include "odn/random.hpp"

namespace odn {

namespace {

std::atomic<bool> g_deterministic{false};

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_trunk_net(const MLPConfig& cfg, std::size_t d_v, const char* what) {
  cfg.validate();
  if (!cfg.activate_last_layer) {
    throw ConfigError(std::string(what) + " networks must activate their last layer");
  }
  if (cfg.input_dim != d_v) {
    throw DimensionError(std::string(what) + " network input_dim " +
                         std::to_string(cfg.input_dim) + " differs from location dimension " +
                         std::to_string(d_v));
  }
}

}  // namespace

std::string to_string(TrunkKind k) {
  switch (k) {
    case TrunkKind::vanilla: return "vanilla";
    case TrunkKind::pod: return "pod";
    case TrunkKind::modified_pod: return "modified_pod";
    case TrunkKind::pou: return "pou";
  }
  return "?";
}

TrunkKind parse_trunk_kind(const std::string& name) {
  if (name == "vanilla") return TrunkKind::vanilla;
  if (name == "pod") return TrunkKind::pod;
  if (name == "modified_pod" || name == "modified-pod") return TrunkKind::modified_pod;
  if (name == "pou") return TrunkKind::pou;
  throw ConfigError("unknown trunk kind '" + name + "'");
}

void set_deterministic(bool on) { g_deterministic = on; }
bool deterministic() { return g_deterministic; }

TrunkKind member_kind(const TrunkMember& m) {
  return std::visit(overloaded{
                        [](const VanillaTrunk&) { return TrunkKind::vanilla; },
                        [](const PodTrunk& t) {
                          return t.basis->modified ? TrunkKind::modified_pod : TrunkKind::pod;
                        },
                        [](const PouTrunk&) { return TrunkKind::pou; },
                    },
                    m);
}

std::size_t member_width(const TrunkMember& m) {
  return std::visit(overloaded{
                        [](const VanillaTrunk& t) { return t.net.config().output_dim; },
                        [](const PodTrunk& t) { return t.basis->p; },
                        [](const PouTrunk& t) { return t.experts.front().config().output_dim; },
                    },
                    m);
}

std::vector<std::size_t> pod_indices(const PODBasis& basis, const Matrix& Y) {
  std::vector<std::size_t> idx(Y.rows);
  if (Y == basis.Y) {
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    return idx;
  }
  for (std::size_t i = 0; i < Y.rows; ++i) idx[i] = basis.locate(Y.row(i));
  return idx;
}

Tensor pou_trunk_forward(const PouTrunk& member, const Matrix& Y) {
  const Matrix W = pou_weight_matrix(member.patches, Y);
  const std::size_t P = member.patches.size();

  struct Active {
    std::vector<std::size_t> rows;
    std::vector<double> weights;
  };
  std::vector<Active> active(P);
  for (std::size_t i = 0; i < Y.rows; ++i) {
    for (std::size_t k = 0; k < P; ++k) {
      if (W(i, k) > 0.0) {
        active[k].rows.push_back(i);
        active[k].weights.push_back(W(i, k));
      }
    }
  }

  auto expert_output = [&](std::size_t k) {
    const Tensor yk = Tensor::from_matrix(Y.select_rows(active[k].rows));
    return scale_rows(member.experts[k].forward(yk), active[k].weights);
  };

  std::vector<Tensor> outputs(P);
  const bool concurrent = !deterministic() && active_tape() == nullptr && P > 1;
  if (concurrent) {
    std::vector<std::future<Tensor>> pending(P);
    for (std::size_t k = 0; k < P; ++k) {
      if (!active[k].rows.empty()) pending[k] = std::async(std::launch::async, expert_output, k);
    }
    for (std::size_t k = 0; k < P; ++k) {
      if (pending[k].valid()) outputs[k] = pending[k].get();
    }
  } else {
    for (std::size_t k = 0; k < P; ++k) {
      if (!active[k].rows.empty()) outputs[k] = expert_output(k);
    }
  }

  Tensor total;
  for (std::size_t k = 0; k < P; ++k) {
    if (!outputs[k].defined()) continue;
    Tensor placed = scatter_rows(outputs[k], active[k].rows, Y.rows);
    total = total.defined() ? add(total, placed) : placed;
  }
  return total;
}

Tensor member_forward(const TrunkMember& m, const Matrix& Y) {
  return std::visit(overloaded{
                        [&](const VanillaTrunk& t) { return t.net.forward(Tensor::from_matrix(Y)); },
                        [&](const PodTrunk& t) {
                          const auto idx = pod_indices(*t.basis, Y);
                          return Tensor::from_matrix(pod_trunk_matrix(*t.basis, idx));
                        },
                        [&](const PouTrunk& t) { return pou_trunk_forward(t, Y); },
                    },
                    m);
}

// -- EnsembleModel -----------------------------------------------------------

EnsembleModel::EnsembleModel(std::vector<TrunkMember> members, MLP branch, bool use_bias)
    : members_(std::move(members)), branch_(std::move(branch)) {
  if (members_.empty()) throw ConfigError("ensemble needs at least one trunk member");
  if (branch_.config().activate_last_layer) {
    throw ConfigError("branch network must not activate its last layer");
  }
  if (branch_.config().output_dim != total_width()) {
    throw DimensionError("branch output width " + std::to_string(branch_.config().output_dim) +
                         " differs from total trunk width " + std::to_string(total_width()));
  }
  std::size_t d_v = 0;
  std::size_t offsets = 0;
  for (const auto& m : members_) {
    std::visit(overloaded{
                   [&](const VanillaTrunk& t) {
                     if (!t.net.config().activate_last_layer) {
                       throw ConfigError("trunk networks must activate their last layer");
                     }
                     d_v = t.net.config().input_dim;
                   },
                   [&](const PodTrunk& t) {
                     if (!t.basis) throw ConfigError("POD trunk without basis");
                     if (!t.basis->modified) ++offsets;
                     d_v = t.basis->Y.cols;
                   },
                   [&](const PouTrunk& t) {
                     if (t.experts.size() != t.patches.size() || t.experts.empty()) {
                       throw ConfigError("PoU trunk needs exactly one expert per patch");
                     }
                     for (const auto& e : t.experts) {
                       if (!e.config().activate_last_layer) {
                         throw ConfigError("trunk networks must activate their last layer");
                       }
                       if (e.config() != t.experts.front().config()) {
                         throw ConfigError("PoU experts must share one architecture");
                       }
                     }
                     d_v = t.patches.dim();
                   },
               },
               m);
  }
  (void)d_v;
  if (offsets > 1) throw ConfigError("at most one standard (offset) POD member is allowed");
  if (use_bias) bias_ = Tensor::zeros({1}, true);
}

std::size_t EnsembleModel::total_width() const {
  std::size_t total = 0;
  for (const auto& m : members_) total += member_width(m);
  return total;
}

const PODBasis* EnsembleModel::offset_basis() const {
  for (const auto& m : members_) {
    if (const auto* pod = std::get_if<PodTrunk>(&m); pod && !pod->basis->modified) {
      return pod->basis.get();
    }
  }
  return nullptr;
}

Tensor EnsembleModel::trunk_forward(const Matrix& Y) const {
  if (members_.size() == 1) return member_forward(members_.front(), Y);
  std::vector<Tensor> parts;
  parts.reserve(members_.size());
  for (const auto& m : members_) parts.push_back(member_forward(m, Y));
  return concat_cols(parts);
}

Tensor EnsembleModel::predict(const Matrix& U, const Matrix& Y) const {
  if (U.cols != input_width()) {
    throw DimensionError("input functions have N_x=" + std::to_string(U.cols) +
                         " samples but the branch expects N_x=" + std::to_string(input_width()));
  }
  const Tensor coeffs = branch_.forward(Tensor::from_matrix(U));
  const Tensor basis = trunk_forward(Y);
  Tensor out = matmul(coeffs, transpose(basis));
  if (has_bias()) out = add_scalar(out, bias_);
  if (const PODBasis* pod = offset_basis()) {
    const auto idx = pod_indices(*pod, Y);
    std::vector<double> phi0(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) phi0[i] = pod->mean[idx[i]];
    out = add_bias(out, Tensor::from({1, idx.size()}, std::move(phi0)));
  }
  return out;
}

std::vector<double> EnsembleModel::export_basis(const Matrix& Y, std::size_t column) const {
  if (column >= total_width()) {
    throw IndexError("basis column " + std::to_string(column) + " outside trunk width " +
                     std::to_string(total_width()));
  }
  const Tensor t = trunk_forward(Y);
  std::vector<double> out(Y.rows);
  for (std::size_t i = 0; i < Y.rows; ++i) out[i] = t.at(i, column);
  return out;
}

std::vector<Parameter> EnsembleModel::parameters() const {
  std::vector<Parameter> params;
  branch_.collect_parameters("branch", params);
  for (std::size_t j = 0; j < members_.size(); ++j) {
    const std::string prefix = "trunk" + std::to_string(j);
    std::visit(overloaded{
                   [&](const VanillaTrunk& t) { t.net.collect_parameters(prefix, params); },
                   [&](const PodTrunk&) {},
                   [&](const PouTrunk& t) {
                     for (std::size_t k = 0; k < t.experts.size(); ++k) {
                       t.experts[k].collect_parameters(prefix + ".expert" + std::to_string(k),
                                                       params);
                     }
                   },
               },
               members_[j]);
  }
  if (has_bias()) params.push_back({"bias", bias_, false});
  return params;
}

std::size_t EnsembleModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : parameters()) n += p.tensor.size();
  return n;
}

EnsembleModel EnsembleModel::clone() const {
  EnsembleModel copy;
  copy.branch_ = branch_.clone();
  copy.members_.reserve(members_.size());
  for (const auto& m : members_) {
    copy.members_.push_back(std::visit(
        overloaded{
            [](const VanillaTrunk& t) -> TrunkMember { return VanillaTrunk{t.net.clone()}; },
            [](const PodTrunk& t) -> TrunkMember { return t; },
            [](const PouTrunk& t) -> TrunkMember {
              PouTrunk c{t.patches, {}};
              for (const auto& e : t.experts) c.experts.push_back(e.clone());
              return c;
            },
        },
        m));
  }
  if (has_bias()) copy.bias_ = bias_.clone(true);
  return copy;
}

EnsembleModel build_ensemble(const ModelSpec& spec, const Matrix& Y_train, const Matrix& V_train,
                             std::uint64_t seed) {
  if (spec.members.empty()) throw ConfigError("model has no trunk members");
  const std::size_t d_v = Y_train.cols;
  std::vector<TrunkMember> members;
  std::size_t width = 0;
  for (std::size_t j = 0; j < spec.members.size(); ++j) {
    const TrunkSpec& ts = spec.members[j];
    if (ts.p == 0) throw ConfigError("trunk member " + std::to_string(j) + " has p = 0");
    const std::uint64_t member_seed = mix_seed(seed, j + 1);
    switch (ts.kind) {
      case TrunkKind::vanilla: {
        MLPConfig cfg = ts.mlp;
        cfg.output_dim = ts.p;
        check_trunk_net(cfg, d_v, "vanilla trunk");
        members.emplace_back(VanillaTrunk{init_mlp(cfg, member_seed)});
        break;
      }
      case TrunkKind::pod:
      case TrunkKind::modified_pod: {
        auto basis = std::make_shared<PODBasis>(
            compute_pod(Y_train, V_train, ts.p, ts.kind == TrunkKind::modified_pod));
        members.emplace_back(PodTrunk{std::move(basis)});
        break;
      }
      case TrunkKind::pou: {
        MLPConfig cfg = ts.mlp;
        cfg.output_dim = ts.p;
        check_trunk_net(cfg, d_v, "PoU expert");
        if (ts.patches.dim() != d_v) {
          throw DimensionError("patch dimension differs from location dimension");
        }
        const auto uncovered = coverage_check(ts.patches, Y_train);
        if (!uncovered.empty()) {
          throw CoverageError(std::to_string(uncovered.size()) +
                              " sample locations lie outside every patch (first: row " +
                              std::to_string(uncovered.front()) + ")");
        }
        PouTrunk t{ts.patches, {}};
        for (std::size_t k = 0; k < ts.patches.size(); ++k) {
          t.experts.push_back(init_mlp(cfg, mix_seed(member_seed, k)));
        }
        members.emplace_back(std::move(t));
        break;
      }
    }
    width += ts.p;
  }
  MLPConfig branch_cfg = spec.branch;
  branch_cfg.output_dim = width;
  branch_cfg.activate_last_layer = false;
  MLP branch = init_mlp(branch_cfg, mix_seed(seed, 0));
  const bool lone_standard_pod =
      spec.members.size() == 1 && spec.members.front().kind == TrunkKind::pod;
  const bool use_bias = spec.bias.value_or(!lone_standard_pod);
  return EnsembleModel(std::move(members), std::move(branch), use_bias);
}

}  // namespace odn
