// SPDX-License-Identifier: Apache-2.0
//
// Ball-shaped patches, the compactly supported Wendland C2 kernel and the
// partition-of-unity weights built from it.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "odn/matrix.hpp"

namespace odn {

struct Patch {
  std::vector<double> center;
  double radius = 1.0;
};

class PatchSet {
 public:
  PatchSet() = default;
  PatchSet(std::vector<Patch> patches, double delta = 0.0);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return patches_.size(); }
  double delta() const { return delta_; }
  const std::vector<Patch>& patches() const { return patches_; }
  const Patch& operator[](std::size_t k) const { return patches_[k]; }

  friend bool operator==(const PatchSet&, const PatchSet&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<Patch> patches_;
  double delta_ = 0.0;
};

/// (1 - r)^4 (4r + 1) on [0, 1], exactly zero beyond.
double wendland_c2(double r);

/// Wendland kernel of the distance to the patch center scaled by the radius.
double kernel_value(const Patch& patch, std::span<const double> y);

/// Normalized kernel weights w_k(y) = psi_k(y) / sum_j psi_j(y).
/// Throws CoverageError when y lies strictly inside no patch.
std::vector<double> pou_weights(const PatchSet& ps, std::span<const double> y);

/// Weights for every row of `points` (n x P, row-major).
Matrix pou_weight_matrix(const PatchSet& ps, const Matrix& points);

struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
};

/// Nodes of a Cartesian grid spanning `box` (corners included; a single node
/// on an axis sits at the midpoint). Flat indices run with the first axis
/// fastest. Returns the nodes named by `selected`, or all of them when
/// `selected` is empty.
std::vector<std::vector<double>> grid_patch_centers(const Box& box,
                                                    std::span<const std::size_t> counts,
                                                    std::span<const std::size_t> selected = {});

/// rho = (1 + delta) * 0.5 * H * sqrt(d), with H the spacing between adjacent
/// patch centers.
double uniform_radius(double delta, double spacing, std::size_t dim);

/// Indices of rows of `points` not strictly inside any patch.
std::vector<std::size_t> coverage_check(const PatchSet& ps, const Matrix& points);

}  // namespace odn
