// Copyright (c) 2026, acpit developers
// SPDX-License-Identifier: Apache-2.0

#include "acpit/fine_solver.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "acpit/error.hpp"

namespace acpit {

void StepperConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("fine dt must be positive");
  if (!(picard_tol > 0.0)) throw ConfigError("picard_tol must be positive");
  if (picard_max_iter < 1) throw ConfigError("picard_max_iter must be >= 1");
  physics.validate();
}

CnStepper::CnStepper(GridPtr grid, StepperConfig cfg)
    : grid_(std::move(grid)),
      cfg_(cfg),
      workspace_(*grid_),
      base_(grid_->size()),
      rhs_(grid_->size()),
      iterate_(grid_->size()),
      next_(grid_->size()) {
  cfg_.validate();
}

int CnStepper::step(std::span<const double> in, std::span<double> out) {
  const std::size_t size = grid_->size();
  if (in.size() != size || out.size() != size) throw StructuralError("cn_step: field size mismatch");
  const double eps2 = cfg_.physics.epsilon * cfg_.physics.epsilon;
  const double half_dt = 0.5 * cfg_.dt;
  const double alpha = half_dt * eps2;
  const ModelKind kind = cfg_.physics.kind;

  // base = U_n + dt/2 (eps^2 L U_n + f(U_n)), fixed over the Picard loop.
  laplacian_into(*grid_, in, base_);
  for (std::size_t p = 0; p < size; ++p) {
    base_[p] = in[p] + half_dt * (eps2 * base_[p] + f_nonlinear(in[p]));
  }
  const double g_old = nonlocal_g(in, kind);
  std::copy(in.begin(), in.end(), iterate_.begin());

  double increment = 0.0;
  for (int m = 1; m <= cfg_.picard_max_iter; ++m) {
    const double g = 0.5 * (g_old + nonlocal_g(iterate_, kind));
    for (std::size_t p = 0; p < size; ++p) {
      rhs_[p] = base_[p] + half_dt * (f_nonlinear(iterate_[p]) - 2.0 * g);
    }
    helmholtz_solve_into(*grid_, rhs_, alpha, next_, workspace_);
    increment = sup_diff(next_, iterate_);
    iterate_.swap(next_);
    if (!std::isfinite(increment)) break;
    if (increment < cfg_.picard_tol) {
      std::copy(iterate_.begin(), iterate_.end(), out.begin());
      return m;
    }
  }
  std::ostringstream msg;
  msg << "Picard iteration did not reach tol " << cfg_.picard_tol << " in " << cfg_.picard_max_iter
      << " iterations (last increment " << increment << ")";
  throw NonConvergenceError(msg.str(), increment);
}

Field cn_step(const Field& u, const StepperConfig& cfg, int* picard_iters) {
  CnStepper stepper(u.grid_ptr(), cfg);
  Field out(u.grid_ptr());
  const int iters = stepper.step(u.data(), out.data());
  if (picard_iters) *picard_iters = iters;
  return out;
}

int substep_count(double t_start, double t_end, double dt) {
  if (!(t_end > t_start)) throw ConfigError("fine_propagate requires t_end > t_start");
  const double ratio = (t_end - t_start) / dt;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, rounded) || rounded < 1.0) {
    std::ostringstream msg;
    msg << std::setprecision(17) << "interval " << (t_end - t_start) << " is not an integer multiple of dt " << dt;
    throw ConfigError(msg.str());
  }
  return static_cast<int>(rounded);
}

Field fine_propagate(const Field& u, double t_start, double t_end, const StepperConfig& cfg) {
  const int count = substep_count(t_start, t_end, cfg.dt);
  CnStepper stepper(u.grid_ptr(), cfg);
  Field out = u;
  for (int i = 0; i < count; ++i) stepper.step(out.data(), out.data());
  return out;
}

Trajectory reference_run(const Field& u0, double t_final, const StepperConfig& cfg,
                         const ReferenceRunOptions& options) {
  if (options.snapshot_every < 1) throw ConfigError("snapshot_every must be >= 1");
  if (t_final < 0.0) throw ConfigError("t_final must be non-negative");
  const long total = t_final == 0.0 ? 0 : substep_count(0.0, t_final, cfg.dt);

  Trajectory traj;
  auto snapshot = [&](long step, const Field& u) {
    const double t = step * cfg.dt;
    if (options.on_snapshot) options.on_snapshot(step, t, u);
    traj.steps.push_back(step);
    traj.times.push_back(t);
    if (options.keep_snapshots) traj.snapshots.push_back(u);
  };
  auto diagnostics = [&](long step, const Field& u, int iters) {
    DiagnosticsRow row{step, step * cfg.dt, total_mass(u), discrete_energy(u, cfg.physics), iters};
    if (options.on_diagnostics) options.on_diagnostics(row);
    traj.diagnostics.push_back(row);
  };

  Field u = u0;
  snapshot(0, u);
  diagnostics(0, u, 0);
  if (total == 0) return traj;

  CnStepper stepper(u0.grid_ptr(), cfg);
  for (long step = 1; step <= total; ++step) {
    const int iters = stepper.step(u.data(), u.data());
    diagnostics(step, u, iters);
    if (step % options.snapshot_every == 0 || step == total) snapshot(step, u);
  }
  return traj;
}

Trajectory reference_run_to_dir(const Field& u0, double t_final, const StepperConfig& cfg, int snapshot_every,
                                const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream index(dir / "snapshots.csv");
  std::ofstream diag(dir / "diagnostics.csv");
  if (!index || !diag) throw IoError("cannot create output files in " + dir.string());
  index << "step,time,file\n" << std::setprecision(17);
  diag << "step,time,mass,energy,picard_iters\n" << std::setprecision(17);

  ReferenceRunOptions options;
  options.snapshot_every = snapshot_every;
  options.keep_snapshots = false;
  options.on_snapshot = [&](long step, double t, const Field& u) {
    const std::string name = "t" + std::to_string(step) + ".acf";
    write_field(u, dir / name);
    index << step << ',' << t << ',' << name << '\n';
  };
  options.on_diagnostics = [&](const DiagnosticsRow& r) {
    diag << r.step << ',' << r.time << ',' << r.mass << ',' << r.energy << ',' << r.picard_iters << '\n';
  };
  Trajectory traj = reference_run(u0, t_final, cfg, options);
  if (!index || !diag) throw IoError("write failed in " + dir.string());
  return traj;
}

}  // namespace acpit
