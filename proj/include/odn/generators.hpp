// SPDX-License-Identifier: Apache-2.0
//
// Built-in dataset generators: a 1D antiderivative operator and the 2D
// reaction-diffusion problem with a discontinuous binding coefficient.
#pragma once

#include <cstdint>
#include <vector>

#include "odn/dataset.hpp"

namespace odn {

/// u(x) = sum_k a_k sin(k pi x), a_k ~ U(-1, 1);  v(x) = int_0^x u.
/// X = Y = m uniformly spaced points on [0, 1] (endpoints included).
OperatorDataset gen_antiderivative(std::size_t n_samples, std::size_t n_modes, std::size_t m,
                                   std::uint64_t seed);

/// Closed-form antiderivative of the sine series with coefficients a.
double antiderivative_value(const std::vector<double>& a, double x);

/// dc/dt = k_on (R - c) c_amb - k_off c + nu Lap(c) on [0, L]^2 with
/// homogeneous Neumann boundaries, c_amb = (1 + cos(2 pi y1) cos(2 pi y2)) e^{-pi t},
/// and coefficients switching at y1 = interface.
struct RDParams {
  double nu = 0.1;
  double R = 2.0;
  double k_on_left = 2.0;
  double k_off_left = 0.2;
  double k_on_right = 0.0;
  double k_off_right = 0.0;
  double interface = 1.0;
  double length = 2.0;
  double t_final = 0.5;
  std::size_t n = 32;           // cells per axis of the solver grid (= output grid)
  std::size_t branch_grid = 8;  // cells per axis of the input-sample grid
  double dt = 0.0;              // 0 selects the largest stable step dividing t_final
  double safety = 0.9;

  double spacing() const { return length / static_cast<double>(n); }
  /// safety * h^2 / (4 nu); infinite when nu == 0.
  double stability_bound() const;
  /// Validates the parameters and returns the time step actually used.
  double resolved_dt() const;
};

/// Cell-centered grid of n x n points on [0, L]^2, first coordinate fastest.
Matrix cell_centers_2d(std::size_t n, double length);

/// Explicit finite-difference solution at t_final for the constant initial
/// value c0, laid out like cell_centers_2d(params.n, params.length).
std::vector<double> solve_reaction_diffusion_2d(const RDParams& params, double c0);
/// Same scheme from an arbitrary initial field (index j*n+i, y1 fastest).
std::vector<double> solve_reaction_diffusion_2d(const RDParams& params,
                                                std::vector<double> initial);

OperatorDataset gen_reaction_diffusion_2d(const RDParams& params, std::size_t n_samples,
                                          std::uint64_t seed);

/// Variable diffusivity profile with A = 9, B = 0.0215, C = 0.005.
double eval_K_profile(double y1);

}  // namespace odn
