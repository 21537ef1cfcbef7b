// Copyright (c) 2026, acpit developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

#include "acpit/fine_solver.hpp"
#include "acpit/grid.hpp"
#include "acpit/surrogate.hpp"

namespace acpit {

/// Advances a state by one coarse interval.
using Propagator = std::function<Field(const Field&)>;

/// F over one coarse interval of length dt_coarse. Reentrant.
Propagator make_fine_propagator(const StepperConfig& cfg, double dt_coarse);
/// G as `composition` successive network evaluations.
Propagator make_surrogate_propagator(std::shared_ptr<const ModelParams> params, int composition);

/// Fixed-size pool executing index-parallel loops. The calling thread takes
/// part, so a pool of size 1 runs everything inline.
class WorkerPool {
 public:
  explicit WorkerPool(int workers);
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  int size() const { return static_cast<int>(threads_.size()) + 1; }

  /// Runs fn(i) for i in [0, count) and waits. If any call throws, the
  /// exception from the lowest index is rethrown after all calls finished.
  void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

 private:
  void worker_loop();
  void drain();

  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable done_;
  const std::function<void(std::size_t)>* job_ = nullptr;
  std::size_t count_ = 0;
  std::size_t next_ = 0;
  std::size_t finished_ = 0;
  std::size_t generation_ = 0;
  bool stop_ = false;
  std::vector<std::exception_ptr> errors_;
};

struct PararealConfig {
  int s = 100;
  double dt_coarse = 0.1;
  double dt_fine = 1e-3;
  double tol = 1e-6;
  int max_iter = 100;
  int workers = 1;

  /// c = dt_coarse / dt_fine, checked to be an integer.
  int ratio() const;
  void validate() const;
};

struct IterationRecord {
  int k = 0;
  double sup_increment = 0.0;
  /// max over slices of the relative L2 error against the fine trajectory;
  /// NaN when no reference was supplied.
  double rel_l2_vs_fine = 0.0;
  double t_coarse_s = 0.0;
  double t_fine_s = 0.0;
  /// Elapsed time since the start of the run.
  double t_wall_s = 0.0;
  int fine_calls = 0;
  int coarse_calls = 0;
};

struct PararealTrace {
  /// Row k = 0 describes the initial coarse sweep (no increment).
  std::vector<IterationRecord> records;
  bool converged = false;
  int iterations() const { return records.empty() ? 0 : static_cast<int>(records.size()) - 1; }
};

struct PararealResult {
  std::vector<Field> trajectory;
  PararealTrace trace;
};

struct PararealOptions {
  /// Sequential fine trajectory [U_0 .. U_s] used for the error column.
  const std::vector<Field>* fine_reference = nullptr;
  /// Called with the iterate after every iteration k >= 0.
  std::function<void(int k, std::span<const Field> trajectory)> on_iteration;
};

/// Sequential coarse prediction [u0, G(u0), G(G(u0)), ...] of s + 1 states.
std::vector<Field> coarse_sweep(const Field& u0, int s, const Propagator& coarse);

/// True iff every slice differs by less than tol in the sup norm.
bool converged(std::span<const Field> prev, std::span<const Field> curr, double tol);

/// Parareal iteration U^k_{n+1} = G(U^k_n) + F(U^{k-1}_n) - G(U^{k-1}_n).
/// Fine propagations of an iteration run concurrently on the worker pool;
/// the correction sweep is sequential. Slices before k are already exact and
/// are not recomputed; G(U^{k-1}_n) values are cached from the previous sweep.
PararealResult parareal_run(const Field& u0, const PararealConfig& cfg, const Propagator& coarse,
                            const Propagator& fine, const PararealOptions& options = {});

/// Sequential fine trajectory over s coarse intervals.
std::vector<Field> fine_trajectory(const Field& u0, int s, const Propagator& fine);

struct SpeedupEstimate {
  double total_time = 0.0;  ///< T(k)
  double speedup = 0.0;     ///< S_k = c s t_num / T(k)
  double bound = 0.0;       ///< min{s/k, 2 c s t_num / ((2s - k)(k + 1) t_nn)}
};

/// Closed-form cost of k iterations with one worker per slice:
/// T(k) = c k t_num + (2s - k)(k + 1)/2 t_nn.
SpeedupEstimate speedup_model(int s, int k, int c, double t_nn, double t_num);

/// Same cost accounting with a pool of `workers` threads on a machine with
/// `hardware_threads` cores: iteration j runs ceil((s - j + 1)/w) fine
/// propagations back to back, w = min(workers, hardware_threads). Equals
/// speedup_model's T(k) once w >= s.
double predicted_time(int s, int k, int c, double t_nn, double t_num, int workers, int hardware_threads);

struct BenchRow {
  int workers = 0;
  int k = 0;
  double t_wall_s = 0.0;
  double t_model_s = 0.0;
  double baseline_s = 0.0;
};

struct BenchCalibration {
  double t_nn = 0.0;
  double t_num = 0.0;
  int hardware_threads = 1;
};

struct BenchResult {
  std::vector<BenchRow> rows;
  BenchCalibration calibration;
  double baseline_s = 0.0;
  /// Iteration count at which each worker configuration stopped.
  std::vector<int> iterations;
  std::vector<bool> converged;
};

/// Micro-benchmarks t_nn (one coarse step) and t_num (one fine substep).
BenchCalibration calibrate(const Field& u0, const PararealConfig& cfg, const Propagator& coarse,
                           const StepperConfig& fine, int repeats = 3);

/// Measures Parareal wall time per iteration for each worker count together
/// with the sequential fine baseline and the calibrated cost model.
BenchResult bench(const Field& u0, const PararealConfig& cfg, const Propagator& coarse, const StepperConfig& fine,
                  const std::vector<int>& worker_counts);

}  // namespace acpit
