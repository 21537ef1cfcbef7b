// Copyright (c) 2026, acpit developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "acpit/grid.hpp"
#include "acpit/physics.hpp"

namespace acpit {

struct StepperConfig {
  double dt = 1e-3;
  double picard_tol = 1e-12;
  int picard_max_iter = 100;
  PhysicsParams physics;

  void validate() const;
};

/// Crank-Nicolson step solved by Picard iteration. Each Picard iterate solves
///   (I - dt/2 eps^2 L) U^(m+1) = U_n + dt/2 (eps^2 L U_n + f(U_n) + f(U^(m)) - 2 g)
/// with g the average of the nonlocal terms of U_n and U^(m); the iteration
/// starts from U^(0) = U_n and stops once the sup-norm increment drops below
/// picard_tol.
///
/// Holds scratch buffers, so one instance per thread.
class CnStepper {
 public:
  CnStepper(GridPtr grid, StepperConfig cfg);

  /// Writes U_{n+1} into `out` (may alias `in`) and returns the Picard count.
  int step(std::span<const double> in, std::span<double> out);

  const StepperConfig& config() const { return cfg_; }
  const GridPtr& grid() const { return grid_; }

 private:
  GridPtr grid_;
  StepperConfig cfg_;
  SpectralWorkspace workspace_;
  std::vector<double> base_;
  std::vector<double> rhs_;
  std::vector<double> iterate_;
  std::vector<double> next_;
};

Field cn_step(const Field& u, const StepperConfig& cfg, int* picard_iters = nullptr);

/// Number of fine steps spanning [t_start, t_end]; throws ConfigError unless
/// the ratio is an integer to within 1e-9.
int substep_count(double t_start, double t_end, double dt);

/// The fine propagator F(t_start, t_end, u): cn_step applied
/// (t_end - t_start)/dt times.
Field fine_propagate(const Field& u, double t_start, double t_end, const StepperConfig& cfg);

struct DiagnosticsRow {
  long step = 0;
  double time = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  int picard_iters = 0;
};

struct Trajectory {
  std::vector<long> steps;
  std::vector<double> times;
  std::vector<Field> snapshots;
  std::vector<DiagnosticsRow> diagnostics;
};

struct ReferenceRunOptions {
  int snapshot_every = 100;
  /// Keep snapshots in memory (the returned trajectory); otherwise only the
  /// callback sees them.
  bool keep_snapshots = true;
  std::function<void(long step, double time, const Field&)> on_snapshot;
  std::function<void(const DiagnosticsRow&)> on_diagnostics;
};

/// Sequential integration from t = 0 to t_final with step cfg.dt. Snapshots
/// every `snapshot_every` steps (always including the first and last state);
/// diagnostics are recorded every step.
Trajectory reference_run(const Field& u0, double t_final, const StepperConfig& cfg,
                         const ReferenceRunOptions& options = {});

/// Writes `<dir>/t<step>.acf` snapshots, `snapshots.csv` and `diagnostics.csv`.
Trajectory reference_run_to_dir(const Field& u0, double t_final, const StepperConfig& cfg, int snapshot_every,
                                const std::filesystem::path& dir);

}  // namespace acpit
