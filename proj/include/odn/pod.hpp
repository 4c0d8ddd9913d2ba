// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "odn/matrix.hpp"

namespace odn {

/// Proper orthogonal decomposition of output-function snapshots sampled on Y.
struct PODBasis {
  Matrix Y;                          // N_y x d_v sample locations
  std::vector<double> mean;          // phi_0 over Y, from raw snapshots
  Matrix modes;                      // N_y x n_modes, orthonormal columns
  std::vector<double> eigenvalues;   // all eigenvalues of T, descending, >= 0
  std::size_t p = 0;                 // trunk width
  bool modified = false;             // phi_0 is a basis column (else an offset)
  std::uint64_t y_hash = 0;

  std::size_t n_points() const { return Y.rows; }
  std::size_t n_modes() const { return modes.cols; }

  /// Row index of an exact sample location, or throws IndexError.
  std::size_t locate(std::span<const double> y) const;

  friend bool operator==(const PODBasis&, const PODBasis&) = default;
};

/// Hash of a coordinate array (CRC32 of its little-endian bytes).
std::uint64_t hash_points(const Matrix& Y);

/// Standardizes every snapshot row by its spatial mean and population standard
/// deviation, eigendecomposes T = V^T V / N and keeps the leading modes:
/// p - 1 of them for the modified basis, p for the standard one.
PODBasis compute_pod(const Matrix& Y, const Matrix& snapshots, std::size_t p, bool modified);

/// Trunk row at sample location `y_index`, scaled by 1/p.
/// modified:  [phi_0, phi_1, ..., phi_{p-1}] / p
/// standard:  [phi_1, ..., phi_p] / p   (phi_0 is added to predictions separately)
std::vector<double> pod_trunk_eval(const PODBasis& basis, std::size_t y_index);

/// Trunk rows for a list of sample indices (B x p).
Matrix pod_trunk_matrix(const PODBasis& basis, std::span<const std::size_t> y_indices);

}  // namespace odn
