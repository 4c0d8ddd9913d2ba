// SPDX-License-Identifier: Apache-2.0
#include "odn/partition.hpp"

#include <cmath>
#include <string>

namespace odn {

PatchSet::PatchSet(std::vector<Patch> patches, double delta)
    : patches_(std::move(patches)), delta_(delta) {
  if (patches_.empty()) throw ConfigError("PatchSet needs at least one patch");
  dim_ = patches_.front().center.size();
  if (dim_ == 0) throw DimensionError("PatchSet: zero-dimensional patch center");
  for (const auto& p : patches_) {
    if (p.center.size() != dim_) throw DimensionError("PatchSet: patches differ in dimension");
    if (!(p.radius > 0.0) || !std::isfinite(p.radius)) {
      throw DomainError("PatchSet: patch radius must be positive and finite");
    }
  }
}

double wendland_c2(double r) {
  if (r < 0.0 || std::isnan(r)) throw DomainError("wendland_c2: negative radial argument");
  if (r > 1.0) return 0.0;
  const double s = 1.0 - r;
  const double s2 = s * s;
  return s2 * s2 * (4.0 * r + 1.0);
}

double kernel_value(const Patch& patch, std::span<const double> y) {
  if (y.size() != patch.center.size()) {
    throw DimensionError("kernel_value: point has dimension " + std::to_string(y.size()) +
                         ", patch has " + std::to_string(patch.center.size()));
  }
  double d2 = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double diff = y[i] - patch.center[i];
    d2 += diff * diff;
  }
  return wendland_c2(std::sqrt(d2) / patch.radius);
}

std::vector<double> pou_weights(const PatchSet& ps, std::span<const double> y) {
  std::vector<double> w(ps.size());
  double total = 0.0;
  for (std::size_t k = 0; k < ps.size(); ++k) {
    w[k] = kernel_value(ps[k], y);
    total += w[k];
  }
  if (!(total > 0.0)) throw CoverageError("pou_weights: point is not inside any patch");
  for (auto& v : w) v /= total;
  return w;
}

Matrix pou_weight_matrix(const PatchSet& ps, const Matrix& points) {
  Matrix out(points.rows, ps.size());
  for (std::size_t i = 0; i < points.rows; ++i) {
    std::vector<double> w;
    try {
      w = pou_weights(ps, points.row(i));
    } catch (const CoverageError&) {
      throw CoverageError("sample location " + std::to_string(i) +
                          " is not strictly inside any patch");
    }
    std::copy(w.begin(), w.end(), out.row(i).begin());
  }
  return out;
}

std::vector<std::vector<double>> grid_patch_centers(const Box& box,
                                                    std::span<const std::size_t> counts,
                                                    std::span<const std::size_t> selected) {
  const std::size_t d = counts.size();
  if (d == 0 || box.lo.size() != d || box.hi.size() != d) {
    throw DimensionError("grid_patch_centers: box and counts disagree in dimension");
  }
  std::size_t total = 1;
  for (std::size_t a = 0; a < d; ++a) {
    if (counts[a] == 0) throw ConfigError("grid_patch_centers: counts must be >= 1");
    if (box.hi[a] < box.lo[a]) throw ConfigError("grid_patch_centers: inverted box");
    total *= counts[a];
  }
  auto node = [&](std::size_t flat) {
    std::vector<double> c(d);
    for (std::size_t a = 0; a < d; ++a) {
      const std::size_t i = flat % counts[a];
      flat /= counts[a];
      c[a] = counts[a] == 1
                 ? 0.5 * (box.lo[a] + box.hi[a])
                 : box.lo[a] + (box.hi[a] - box.lo[a]) * static_cast<double>(i) /
                                   static_cast<double>(counts[a] - 1);
    }
    return c;
  };
  std::vector<std::vector<double>> out;
  if (selected.empty()) {
    for (std::size_t f = 0; f < total; ++f) out.push_back(node(f));
    return out;
  }
  for (auto f : selected) {
    if (f >= total) {
      throw IndexError("grid_patch_centers: index " + std::to_string(f) + " outside grid of " +
                       std::to_string(total) + " nodes");
    }
    out.push_back(node(f));
  }
  return out;
}

double uniform_radius(double delta, double spacing, std::size_t dim) {
  if (!(spacing > 0.0)) throw DomainError("uniform_radius: spacing must be positive");
  if (dim == 0) throw DomainError("uniform_radius: dimension must be >= 1");
  if (delta < 0.0) throw DomainError("uniform_radius: overlap must be nonnegative");
  return (1.0 + delta) * 0.5 * spacing * std::sqrt(static_cast<double>(dim));
}

std::vector<std::size_t> coverage_check(const PatchSet& ps, const Matrix& points) {
  if (points.cols != ps.dim()) throw DimensionError("coverage_check: dimension mismatch");
  std::vector<std::size_t> uncovered;
  for (std::size_t i = 0; i < points.rows; ++i) {
    bool inside = false;
    for (std::size_t k = 0; k < ps.size() && !inside; ++k) {
      inside = kernel_value(ps[k], points.row(i)) > 0.0;
    }
    if (!inside) uncovered.push_back(i);
  }
  return uncovered;
}

}  // namespace odn
