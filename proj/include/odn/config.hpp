// SPDX-License-Identifier: Apache-2.0
//
// Run configuration: an INI-style text file with [data], [model], [train] and
// [eval] sections of `key = value` lines. '#' starts a comment. Unknown
// sections or keys are errors.
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "odn/generators.hpp"
#include "odn/partition.hpp"
#include "odn/training.hpp"
#include "odn/trunks.hpp"

namespace odn {

struct DataConfig {
  std::string generator = "rd2d";  // rd2d | antiderivative
  std::size_t n_train = 200;
  std::size_t n_test = 40;
  std::uint64_t seed = 0;
  std::size_t n_modes = 3;  // antiderivative
  std::size_t m = 100;      // antiderivative
  RDParams rd;
};

struct PatchConfig {
  std::vector<std::size_t> grid;             // centers per axis
  Box box;                                   // grid bounding box
  std::vector<std::size_t> select;           // grid node indices; empty = all
  std::vector<std::vector<double>> centers;  // explicit centers (override the grid)
  std::vector<double> radii;                 // explicit per-patch radii
  double delta = 0.1;
  double radius = 0.0;                       // 0 = uniform_radius from the grid spacing
};

struct ModelConfig {
  std::vector<TrunkKind> members{TrunkKind::vanilla};
  Activation activation = Activation::relu;
  std::vector<std::size_t> branch_hidden{64, 64, 64};
  std::vector<std::size_t> trunk_hidden{64, 64, 64};
  std::size_t p_vanilla = 40;
  std::size_t p_pod = 20;
  std::size_t p_pou = 40;
  std::optional<bool> bias;
  PatchConfig patches;
};

struct EvalConfig {
  std::string split = "test";  // test | train | all
};

struct RunConfig {
  DataConfig data;
  ModelConfig model;
  TrainConfig train;
  EvalConfig eval;
  std::vector<std::uint64_t> seeds{0};
  std::string text;  // source text, stored in checkpoints and manifests
};

using IniDocument = std::map<std::string, std::map<std::string, std::string>>;

IniDocument parse_ini(const std::string& text);
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

std::vector<std::uint64_t> parse_seed_list(const std::string& text);

/// Builds the patch set described by `cfg` in `dim` dimensions.
PatchSet make_patch_set(const PatchConfig& cfg, std::size_t dim);

/// Declarative model for locations of dimension d_v and N_x input samples.
ModelSpec make_model_spec(const ModelConfig& cfg, std::size_t d_v, std::size_t n_x);

/// Generates n_train + n_test samples and tags the training split.
OperatorDataset generate_dataset(const DataConfig& cfg);

/// Compact member list such as "modified_pod+pou".
std::string model_label(const ModelConfig& cfg);

}  // namespace odn
