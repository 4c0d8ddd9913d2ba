// SPDX-License-Identifier: Apache-2.0
//
// Trunk members (vanilla MLP, POD, modified POD, PoU mixture of experts), the
// column-stacked ensemble trunk and the full DeepONet prediction
//   G(u)(y) = <trunk(y), branch(u)> + b0 [+ phi_0(y) for a standard POD member].
#pragma once

#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "odn/mlp.hpp"
#include "odn/partition.hpp"
#include "odn/pod.hpp"

namespace odn {

enum class TrunkKind : std::uint8_t { vanilla = 0, pod = 1, modified_pod = 2, pou = 3 };

std::string to_string(TrunkKind k);
TrunkKind parse_trunk_kind(const std::string& name);

/// Declarative description of one trunk member.
struct TrunkSpec {
  TrunkKind kind = TrunkKind::vanilla;
  std::size_t p = 1;
  MLPConfig mlp;     // vanilla network, or the per-patch expert network for pou
  PatchSet patches;  // pou only
};

struct ModelSpec {
  std::vector<TrunkSpec> members;
  MLPConfig branch;            // output_dim is overwritten with the total trunk width
  std::optional<bool> bias;    // default: on unless the model is a lone standard POD trunk
};

struct VanillaTrunk {
  MLP net;
};

struct PodTrunk {
  std::shared_ptr<const PODBasis> basis;
};

struct PouTrunk {
  PatchSet patches;
  std::vector<MLP> experts;  // one per patch, identical configs
};

using TrunkMember = std::variant<VanillaTrunk, PodTrunk, PouTrunk>;

TrunkKind member_kind(const TrunkMember& m);
std::size_t member_width(const TrunkMember& m);
Tensor member_forward(const TrunkMember& m, const Matrix& Y);

/// sum_k w_k(y) tau_k(y), evaluating expert k only on rows where w_k > 0.
Tensor pou_trunk_forward(const PouTrunk& member, const Matrix& Y);

/// Row indices of Y inside the basis' training locations.
std::vector<std::size_t> pod_indices(const PODBasis& basis, const Matrix& Y);

/// When set, PoU experts are always evaluated one after another. Otherwise
/// tape-free inference may evaluate experts concurrently; the weighted sum is
/// accumulated in patch order in either case.
void set_deterministic(bool on);
bool deterministic();

class EnsembleModel {
 public:
  EnsembleModel() = default;
  EnsembleModel(std::vector<TrunkMember> members, MLP branch, bool use_bias);

  const std::vector<TrunkMember>& members() const { return members_; }
  std::vector<TrunkMember>& members() { return members_; }
  const MLP& branch() const { return branch_; }
  MLP& branch() { return branch_; }
  bool has_bias() const { return bias_.defined(); }
  const Tensor& bias() const { return bias_; }
  Tensor& bias() { return bias_; }
  std::size_t total_width() const;
  std::size_t input_width() const { return branch_.config().input_dim; }
  /// Basis of the standard POD member whose mean is added to predictions.
  const PODBasis* offset_basis() const;

  /// Ensemble trunk over the rows of Y: B_y x total_width().
  Tensor trunk_forward(const Matrix& Y) const;
  /// Predictions for every (input function, location) pair: B_u x B_y.
  Tensor predict(const Matrix& U, const Matrix& Y) const;

  /// One ensemble-trunk column sampled over Y.
  std::vector<double> export_basis(const Matrix& Y, std::size_t column) const;

  std::vector<Parameter> parameters() const;
  std::size_t parameter_count() const;

  EnsembleModel clone() const;

 private:
  std::vector<TrunkMember> members_;
  MLP branch_;
  Tensor bias_;
};

/// Builds and initializes a model. POD members are fitted on V_train
/// (N_train x N_y over Y_train); PoU members must cover Y_train.
EnsembleModel build_ensemble(const ModelSpec& spec, const Matrix& Y_train,
                             const Matrix& V_train, std::uint64_t seed);

}  // namespace odn
