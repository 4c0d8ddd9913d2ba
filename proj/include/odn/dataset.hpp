// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "odn/matrix.hpp"

namespace odn {

/// Paired input/output function samples.
///   X: N_x x d_u input sample locations     U: N x N_x input samples
///   Y: N_y x d_v output sample locations    V: N x (N_y * c) output samples,
///                                              components fastest per point
struct OperatorDataset {
  Matrix X;
  Matrix Y;
  Matrix U;
  Matrix V;
  std::size_t components = 1;
  std::map<std::string, std::string> metadata;

  std::size_t size() const { return U.rows; }
  std::size_t n_x() const { return X.rows; }
  std::size_t n_y() const { return Y.rows; }

  /// Throws DimensionError / NumericError when shape or finiteness invariants fail.
  void validate() const;

  /// Number of leading samples forming the training split (metadata key
  /// "n_train"), or `fallback` when the key is absent.
  std::size_t n_train(std::size_t fallback) const;

  /// Rows [first, first+count) of U and V with shared grids and metadata.
  OperatorDataset slice(std::size_t first, std::size_t count) const;

  friend bool operator==(const OperatorDataset&, const OperatorDataset&) = default;
};

inline constexpr char kDatasetMagic[9] = "ODNSET01";
inline constexpr std::uint32_t kDatasetVersion = 1;

void write_dataset(const OperatorDataset& ds, const std::filesystem::path& path);
OperatorDataset read_dataset(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_dataset(const OperatorDataset& ds);
OperatorDataset decode_dataset(std::span<const std::uint8_t> bytes);

}  // namespace odn
