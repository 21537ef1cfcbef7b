// Copyright (c) 2026, acpit developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "acpit/grid.hpp"

namespace acpit {

enum class ModelKind : std::uint8_t { Classic = 0, MassConservative = 1 };

std::string_view to_string(ModelKind kind);
/// Accepts "classic" or "mass".
ModelKind parse_model_kind(std::string_view text);

struct Bounds {
  double lo;
  double hi;
};

/// Maximum-bound interval: [-1, 1] for the classic equation and
/// [-2*sqrt(3)/3, 2*sqrt(3)/3] for the mass-conservative one.
Bounds mbp_bounds(ModelKind kind);

struct PhysicsParams {
  ModelKind kind = ModelKind::Classic;
  double epsilon = 0.01;

  Bounds bounds() const { return mbp_bounds(kind); }
  void validate() const;
};

inline double f_nonlinear(double u) { return u - u * u * u; }
inline double f_prime(double u) { return 1.0 - 3.0 * u * u; }
inline double potential_density(double u) {
  const double w = u * u - 1.0;
  return 0.25 * w * w;
}

/// Grid mean of f(u) for the mass-conservative model, 0 for the classic one.
double nonlocal_g(const Field& u, const PhysicsParams& params);
double nonlocal_g(std::span<const double> u, ModelKind kind);

/// h^dim * sum(u).
double total_mass(const Field& u);

/// h^dim * sum((eps^2/2)|grad_h u|^2 + F(u)) with periodic forward differences.
double discrete_energy(const Field& u, const PhysicsParams& params);

/// Two overlapping discs of radius 0.2 centred at (+-0.14, 0).
double bubbles_value(double x, double y, double eps);
Field ic_bubbles(const GridPtr& grid, double eps);

/// Counter-based uniform draw in [-amplitude, amplitude): the value at linear
/// index i depends only on (seed, i).
double random_value(std::uint64_t seed, std::uint64_t index, double amplitude);
Field ic_random(const GridPtr& grid, double amplitude, std::uint64_t seed);

/// Star level set r0(theta, phi) = 0.25 + 0.1 cos(6 theta) sin^3(phi) about the
/// domain centre, smoothed as tanh((r0 - r)/eps).
inline constexpr std::string_view kStarFormula = "u0 = tanh((r0 - r)/eps), r0 = 0.25 + 0.1*cos(6*theta)*sin(phi)^3";
double star_value(double x, double y, double z, double eps);
Field ic_star(const GridPtr& grid, double eps);

struct RelativeError {
  double value = 0.0;
  /// Set when the reference is identically zero and `value` is the absolute
  /// L2 norm of the difference.
  bool absolute = false;
};

RelativeError rel_l2_error(const Field& u, const Field& ref);

}  // namespace acpit
