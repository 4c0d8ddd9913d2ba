// SPDX-License-Identifier: Apache-2.0
//
// ODM1 model checkpoints. Little-endian layout:
//
//   "ODNMDL01" | u32 version | string config text | u64 seed
//   branch MLPConfig | u8 has_bias | u32 member count
//   per member: u8 kind, then
//     vanilla       MLPConfig
//     pod/mod. pod  u64 y_hash, u32 N_y, u32 d_v, u32 n_modes, u32 p,
//                   f64 Y, f64 mean, f64 modes, u32 n_eig, f64 eigenvalues
//     pou           u32 d, u32 P, f64 delta, P x (f64 center[d], f64 radius),
//                   expert MLPConfig
//   u32 tensor count, per tensor: string name, u32 rank, u64 extents, f64 data
//   u32 CRC32 of everything before it
//
// MLPConfig: u32 input, u32 n_hidden, u32 widths..., u32 output, u8 activation,
// u8 activate_last_layer. Strings carry a u32 length prefix.
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "odn/trunks.hpp"

namespace odn {

inline constexpr char kModelMagic[9] = "ODNMDL01";
inline constexpr std::uint32_t kModelVersion = 1;

struct Checkpoint {
  std::string config_text;
  std::uint64_t seed = 0;
  EnsembleModel model;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void write_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint read_checkpoint(const std::filesystem::path& path);

/// Human-readable summary of a checkpoint (members, widths, parameter count).
std::string describe_checkpoint(const Checkpoint& ckpt);

}  // namespace odn
