// SPDX-License-Identifier: Apache-2.0
#include "odn/generators.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "odn/random.hpp"

namespace odn {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

double antiderivative_value(const std::vector<double>& a, double x) {
  double v = 0.0;
  for (std::size_t k = 1; k <= a.size(); ++k) {
    const double w = static_cast<double>(k) * std::numbers::pi;
    v += a[k - 1] * (1.0 - std::cos(w * x)) / w;
  }
  return v;
}

OperatorDataset gen_antiderivative(std::size_t n_samples, std::size_t n_modes, std::size_t m,
                                   std::uint64_t seed) {
  if (m < 8) throw ConfigError("antiderivative generator needs at least 8 grid points");
  if (n_modes == 0) throw ConfigError("antiderivative generator needs at least one mode");
  OperatorDataset ds;
  ds.X = Matrix(m, 1);
  for (std::size_t i = 0; i < m; ++i) ds.X(i, 0) = static_cast<double>(i) / static_cast<double>(m - 1);
  ds.Y = ds.X;
  ds.U = Matrix(n_samples, m);
  ds.V = Matrix(n_samples, m);
  for (std::size_t s = 0; s < n_samples; ++s) {
    Rng rng(mix_seed(seed, s));
    std::vector<double> a(n_modes);
    for (auto& c : a) c = rng.uniform(-1.0, 1.0);
    for (std::size_t i = 0; i < m; ++i) {
      const double x = ds.X(i, 0);
      double u = 0.0;
      for (std::size_t k = 1; k <= n_modes; ++k) {
        u += a[k - 1] * std::sin(static_cast<double>(k) * std::numbers::pi * x);
      }
      ds.U(s, i) = u;
      ds.V(s, i) = antiderivative_value(a, x);
    }
  }
  ds.metadata = {{"generator", "antiderivative"},
                 {"n_modes", std::to_string(n_modes)},
                 {"m", std::to_string(m)},
                 {"seed", std::to_string(seed)}};
  return ds;
}

double RDParams::stability_bound() const {
  if (nu == 0.0) return std::numeric_limits<double>::infinity();
  const double h = spacing();
  return safety * h * h / (4.0 * nu);
}

double RDParams::resolved_dt() const {
  if (n < 2) throw ConfigError("reaction-diffusion grid needs n >= 2");
  if (branch_grid < 1) throw ConfigError("reaction-diffusion branch grid needs >= 1 cell");
  if (nu < 0.0 || R <= 0.0 || length <= 0.0 || t_final <= 0.0) {
    throw ConfigError("reaction-diffusion parameters out of range");
  }
  const double bound = stability_bound();
  if (dt > 0.0) {
    if (dt > bound) {
      throw ConfigError("time step " + fmt(dt) + " violates the explicit stability bound " +
                         fmt(bound) + " (0.9 h^2 / (4 nu))");
    }
    return dt;
  }
  if (dt < 0.0) throw ConfigError("reaction-diffusion dt must be positive");
  // Largest step not exceeding the bound that divides t_final evenly; 100
  // steps when there is no diffusion limit.
  const double cap = std::isfinite(bound) ? bound : t_final / 100.0;
  const double steps = std::ceil(t_final / cap - 1e-12);
  return t_final / steps;
}

Matrix cell_centers_2d(std::size_t n, double length) {
  const double h = length / static_cast<double>(n);
  Matrix pts(n * n, 2);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      pts(j * n + i, 0) = (static_cast<double>(i) + 0.5) * h;
      pts(j * n + i, 1) = (static_cast<double>(j) + 0.5) * h;
    }
  }
  return pts;
}

std::vector<double> solve_reaction_diffusion_2d(const RDParams& params, double c0) {
  return solve_reaction_diffusion_2d(params, std::vector<double>(params.n * params.n, c0));
}

std::vector<double> solve_reaction_diffusion_2d(const RDParams& params,
                                                std::vector<double> initial) {
  const double dt = params.resolved_dt();
  const std::size_t n = params.n;
  const double h = params.spacing();
  const double inv_h2 = 1.0 / (h * h);
  const auto steps = static_cast<std::size_t>(std::llround(params.t_final / dt));
  const double blowup = 10.0 * params.R;
  if (initial.size() != n * n) {
    throw DimensionError("initial field has " + std::to_string(initial.size()) +
                         " values, grid has " + std::to_string(n * n));
  }

  std::vector<double> k_on(n * n), k_off(n * n), spatial(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const double y1 = (static_cast<double>(i) + 0.5) * h;
      const double y2 = (static_cast<double>(j) + 0.5) * h;
      const bool left = y1 <= params.interface;
      k_on[j * n + i] = left ? params.k_on_left : params.k_on_right;
      k_off[j * n + i] = left ? params.k_off_left : params.k_off_right;
      spatial[j * n + i] =
          1.0 + std::cos(2.0 * std::numbers::pi * y1) * std::cos(2.0 * std::numbers::pi * y2);
    }
  }

  std::vector<double> c = std::move(initial), next(n * n);
  for (std::size_t s = 0; s < steps; ++s) {
    const double decay = std::exp(-std::numbers::pi * static_cast<double>(s) * dt);
    for (std::size_t j = 0; j < n; ++j) {
      // Ghost nodes mirror the boundary cell: zero normal flux.
      const std::size_t jm = j == 0 ? 0 : j - 1;
      const std::size_t jp = j + 1 == n ? j : j + 1;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t im = i == 0 ? 0 : i - 1;
        const std::size_t ip = i + 1 == n ? i : i + 1;
        const std::size_t id = j * n + i;
        const double ci = c[id];
        const double lap =
            (c[j * n + im] + c[j * n + ip] + c[jm * n + i] + c[jp * n + i] - 4.0 * ci) * inv_h2;
        const double reaction =
            k_on[id] * (params.R - ci) * spatial[id] * decay - k_off[id] * ci;
        next[id] = ci + dt * (reaction + params.nu * lap);
      }
    }
    c.swap(next);
    for (double v : c) {
      if (!(std::abs(v) <= blowup)) {
        throw NumericError("reaction-diffusion solver blew up at step " + std::to_string(s + 1));
      }
    }
  }
  return c;
}

OperatorDataset gen_reaction_diffusion_2d(const RDParams& params, std::size_t n_samples,
                                          std::uint64_t seed) {
  const double dt = params.resolved_dt();
  OperatorDataset ds;
  ds.X = cell_centers_2d(params.branch_grid, params.length);
  ds.Y = cell_centers_2d(params.n, params.length);
  ds.U = Matrix(n_samples, ds.X.rows);
  ds.V = Matrix(n_samples, ds.Y.rows);
  for (std::size_t s = 0; s < n_samples; ++s) {
    Rng rng(mix_seed(seed, s));
    const double c0 = rng.uniform();
    std::fill(ds.U.row(s).begin(), ds.U.row(s).end(), c0);
    const auto c = solve_reaction_diffusion_2d(params, c0);
    std::copy(c.begin(), c.end(), ds.V.row(s).begin());
  }
  ds.metadata = {{"generator", "rd2d"},
                 {"n", std::to_string(params.n)},
                 {"branch_grid", std::to_string(params.branch_grid)},
                 {"nu", fmt(params.nu)},
                 {"R", fmt(params.R)},
                 {"k_on_left", fmt(params.k_on_left)},
                 {"k_off_left", fmt(params.k_off_left)},
                 {"k_on_right", fmt(params.k_on_right)},
                 {"k_off_right", fmt(params.k_off_right)},
                 {"t_final", fmt(params.t_final)},
                 {"dt", fmt(dt)},
                 {"seed", std::to_string(seed)}};
  return ds;
}

double eval_K_profile(double y1) {
  constexpr double A = 9.0, B = 0.0215, C = 0.005;
  return B + (C / std::tanh(A)) * ((A - 3.0) * std::tanh(8.0 * y1 - 5.0) -
                                   (A - 15.0) * std::tanh(8.0 * y1 + 5.0) + A * std::tanh(A));
}

}  // namespace odn
