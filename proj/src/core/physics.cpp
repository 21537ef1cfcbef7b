// Copyright (c) 2026, acpit developers
// SPDX-License-Identifier: Apache-2.0

#include "acpit/physics.hpp"

#include <cmath>

#include "acpit/error.hpp"

namespace acpit {
namespace {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void require_dim(const Grid& grid, int dim, const char* what) {
  if (grid.dim() != dim) {
    throw ConfigError(std::string(what) + " requires a " + std::to_string(dim) + "D grid");
  }
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::Classic ? "classic" : "mass";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "classic") return ModelKind::Classic;
  if (text == "mass") return ModelKind::MassConservative;
  throw ConfigError("unknown model kind '" + std::string(text) + "' (expected classic|mass)");
}

Bounds mbp_bounds(ModelKind kind) {
  if (kind == ModelKind::Classic) return {-1.0, 1.0};
  const double b = 2.0 * std::sqrt(3.0) / 3.0;
  return {-b, b};
}

void PhysicsParams::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("epsilon must be positive");
}

double nonlocal_g(std::span<const double> u, ModelKind kind) {
  if (kind == ModelKind::Classic) return 0.0;
  double s = 0.0;
  for (double v : u) s += f_nonlinear(v);
  return s / static_cast<double>(u.size());
}

double nonlocal_g(const Field& u, const PhysicsParams& params) { return nonlocal_g(u.data(), params.kind); }

double total_mass(const Field& u) {
  return std::pow(u.grid().h(), u.grid().dim()) * u.sum();
}

double discrete_energy(const Field& u, const PhysicsParams& params) {
  const Grid& g = u.grid();
  const std::size_t n = static_cast<std::size_t>(g.n());
  const std::size_t total = g.size();
  const double inv_h2 = 1.0 / (g.h() * g.h());
  double grad = 0.0;
  for (int axis = 0; axis < g.dim(); ++axis) {
    const std::size_t stride = g.stride(axis);
    const std::size_t block = stride * n;
    for (std::size_t base = 0; base < total; base += block) {
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t jp = (j + 1) % n;
        for (std::size_t i = 0; i < stride; ++i) {
          const double d = u[base + jp * stride + i] - u[base + j * stride + i];
          grad += d * d;
        }
      }
    }
  }
  double pot = 0.0;
  for (double v : u.data()) pot += potential_density(v);
  const double cell = std::pow(g.h(), g.dim());
  return cell * (0.5 * params.epsilon * params.epsilon * inv_h2 * grad + pot);
}

double bubbles_value(double x, double y, double eps) {
  const double right = std::tanh((0.2 - std::sqrt((x - 0.14) * (x - 0.14) + y * y)) / eps);
  const double left = std::tanh((0.2 - std::sqrt((x + 0.14) * (x + 0.14) + y * y)) / eps);
  return std::max(right, left);
}

Field ic_bubbles(const GridPtr& grid, double eps) {
  require_dim(*grid, 2, "bubbles initial condition");
  Field u(grid);
  const int n = grid->n();
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      u[i + static_cast<std::size_t>(n) * j] = bubbles_value(grid->coord(i), grid->coord(j), eps);
    }
  }
  return u;
}

double random_value(std::uint64_t seed, std::uint64_t index, double amplitude) {
  const std::uint64_t bits = mix64(mix64(seed) ^ (index * 0x9e3779b97f4a7c15ULL));
  const double unit = static_cast<double>(bits >> 11) * 0x1.0p-53;
  return amplitude * (2.0 * unit - 1.0);
}

Field ic_random(const GridPtr& grid, double amplitude, std::uint64_t seed) {
  if (!(amplitude > 0.0)) throw ConfigError("random initial condition amplitude must be positive");
  Field u(grid);
  for (std::size_t p = 0; p < u.size(); ++p) u[p] = random_value(seed, p, amplitude);
  return u;
}

double star_value(double x, double y, double z, double eps) {
  const double r = std::sqrt(x * x + y * y + z * z);
  const double theta = std::atan2(y, x);
  const double phi = r > 0.0 ? std::acos(z / r) : 0.0;
  const double s = std::sin(phi);
  const double r0 = 0.25 + 0.1 * std::cos(6.0 * theta) * s * s * s;
  return std::tanh((r0 - r) / eps);
}

Field ic_star(const GridPtr& grid, double eps) {
  require_dim(*grid, 3, "star initial condition");
  Field u(grid);
  const std::size_t n = static_cast<std::size_t>(grid->n());
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        u[i + n * (j + n * k)] = star_value(grid->coord(static_cast<int>(i)), grid->coord(static_cast<int>(j)),
                                            grid->coord(static_cast<int>(k)), eps);
      }
    }
  }
  return u;
}

RelativeError rel_l2_error(const Field& u, const Field& ref) {
  if (!u.grid().same_shape(ref.grid())) throw StructuralError("rel_l2_error: grid mismatch");
  double diff = 0.0;
  double norm = 0.0;
  for (std::size_t p = 0; p < u.size(); ++p) {
    const double d = u[p] - ref[p];
    diff += d * d;
    norm += ref[p] * ref[p];
  }
  if (norm == 0.0) return {std::sqrt(diff), true};
  return {std::sqrt(diff / norm), false};
}

}  // namespace acpit
