// SPDX-License-Identifier: Apache-2.0
#include "odn/pod.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

#include "odn/binary_io.hpp"

namespace odn {

std::uint64_t hash_points(const Matrix& Y) {
  ByteWriter w;
  w.put_u32(static_cast<std::uint32_t>(Y.rows));
  w.put_u32(static_cast<std::uint32_t>(Y.cols));
  w.put_f64_array(Y.data);
  return crc32(w.bytes());
}

std::size_t PODBasis::locate(std::span<const double> y) const {
  if (y.size() != Y.cols) throw DimensionError("POD locate: dimension mismatch");
  for (std::size_t i = 0; i < Y.rows; ++i) {
    auto row = Y.row(i);
    if (std::equal(row.begin(), row.end(), y.begin())) return i;
  }
  throw IndexError("POD trunk is only defined at training sample locations");
}

PODBasis compute_pod(const Matrix& Y, const Matrix& snapshots, std::size_t p, bool modified) {
  const std::size_t n = snapshots.rows, ny = snapshots.cols;
  if (Y.rows != ny) throw DimensionError("compute_pod: snapshot width differs from |Y|");
  if (n < 2) throw DegenerateError("compute_pod: need at least two snapshots");
  if (p == 0 || p > std::min(n, ny)) {
    throw DomainError("compute_pod: p=" + std::to_string(p) + " outside [1, min(N, N_y)=" +
                      std::to_string(std::min(n, ny)) + "]");
  }
  const std::size_t n_modes = modified ? p - 1 : p;

  Eigen::MatrixXd V(n, ny);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = snapshots.row(i);
    double mu = 0.0;
    for (double v : row) mu += v;
    mu /= static_cast<double>(ny);
    double var = 0.0;
    for (double v : row) var += (v - mu) * (v - mu);
    const double sigma = std::sqrt(var / static_cast<double>(ny));
    if (!(sigma > 0.0)) {
      throw DegenerateError("compute_pod: snapshot " + std::to_string(i) +
                            " is spatially constant (sigma = 0)");
    }
    for (std::size_t j = 0; j < ny; ++j) V(i, j) = (row[j] - mu) / sigma;
  }
  const Eigen::MatrixXd T = (V.transpose() * V) / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(T);
  if (solver.info() != Eigen::Success) throw NumericError("compute_pod: eigensolver failed");

  // Eigen returns ascending eigenvalues; take them from the top.
  const auto& evals = solver.eigenvalues();
  const auto& evecs = solver.eigenvectors();

  PODBasis basis;
  basis.Y = Y;
  basis.p = p;
  basis.modified = modified;
  basis.y_hash = hash_points(Y);
  basis.eigenvalues.resize(ny);
  for (std::size_t i = 0; i < ny; ++i) {
    basis.eigenvalues[i] = std::max(0.0, evals(static_cast<Eigen::Index>(ny - 1 - i)));
  }
  basis.modes = Matrix(ny, n_modes);
  for (std::size_t m = 0; m < n_modes; ++m) {
    const auto col = evecs.col(static_cast<Eigen::Index>(ny - 1 - m));
    // Sign convention: first entry of non-negligible magnitude is positive.
    const double tol = 1e-12 * col.cwiseAbs().maxCoeff();
    double sign = 1.0;
    for (Eigen::Index j = 0; j < col.size(); ++j) {
      if (std::abs(col(j)) > tol) {
        sign = col(j) < 0.0 ? -1.0 : 1.0;
        break;
      }
    }
    for (std::size_t j = 0; j < ny; ++j) basis.modes(j, m) = sign * col(static_cast<Eigen::Index>(j));
  }
  basis.mean.assign(ny, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < ny; ++j) basis.mean[j] += snapshots(i, j);
  }
  for (auto& v : basis.mean) v /= static_cast<double>(n);
  return basis;
}

std::vector<double> pod_trunk_eval(const PODBasis& basis, std::size_t y_index) {
  if (y_index >= basis.n_points()) {
    throw IndexError("pod_trunk_eval: sample index " + std::to_string(y_index) +
                     " outside the " + std::to_string(basis.n_points()) + " training locations");
  }
  const double inv_p = 1.0 / static_cast<double>(basis.p);
  std::vector<double> row;
  row.reserve(basis.p);
  if (basis.modified) row.push_back(basis.mean[y_index] * inv_p);
  for (std::size_t m = 0; m < basis.n_modes(); ++m) row.push_back(basis.modes(y_index, m) * inv_p);
  return row;
}

Matrix pod_trunk_matrix(const PODBasis& basis, std::span<const std::size_t> y_indices) {
  Matrix out(y_indices.size(), basis.p);
  for (std::size_t r = 0; r < y_indices.size(); ++r) {
    auto row = pod_trunk_eval(basis, y_indices[r]);
    std::copy(row.begin(), row.end(), out.row(r).begin());
  }
  return out;
}

}  // namespace odn
