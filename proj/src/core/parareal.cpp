// Copyright (c) 2026, acpit developers
// SPDX-License-Identifier: Apache-2.0

#include "acpit/parareal.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "acpit/error.hpp"

namespace acpit {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double max_rel_error(std::span<const Field> traj, const std::vector<Field>& reference) {
  double worst = 0.0;
  for (std::size_t j = 0; j < traj.size(); ++j) worst = std::max(worst, rel_l2_error(traj[j], reference[j]).value);
  return worst;
}

}  // namespace

Propagator make_fine_propagator(const StepperConfig& cfg, double dt_coarse) {
  cfg.validate();
  const int substeps = substep_count(0.0, dt_coarse, cfg.dt);
  return [cfg, substeps](const Field& u) {
    CnStepper stepper(u.grid_ptr(), cfg);
    Field out = u;
    for (int i = 0; i < substeps; ++i) stepper.step(out.data(), out.data());
    return out;
  };
}

Propagator make_surrogate_propagator(std::shared_ptr<const ModelParams> params, int composition) {
  if (!params) throw ConfigError("surrogate propagator needs a model");
  if (composition < 1) throw ConfigError("coarse_composition must be >= 1");
  return [params, composition](const Field& u) {
    if (u.grid().dim() != params->arch().dim) throw StructuralError("surrogate dimension does not match the grid");
    SurrogateEvaluator eval(*params, u.grid().n());
    Field out = u;
    for (int i = 0; i < composition; ++i) eval.forward(out.data(), out.data());
    return out;
  };
}

WorkerPool::WorkerPool(int workers) {
  if (workers < 1) throw ConfigError("workers must be >= 1");
  for (int i = 1; i < workers; ++i) threads_.emplace_back([this] { worker_loop(); });
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lock(mutex_);
    stop_ = true;
  }
  wake_.notify_all();
  for (auto& t : threads_) t.join();
}

void WorkerPool::drain() {
  for (;;) {
    std::size_t i;
    const std::function<void(std::size_t)>* job;
    {
      std::lock_guard lock(mutex_);
      if (!job_ || next_ >= count_) return;
      i = next_++;
      job = job_;
    }
    try {
      (*job)(i);
    } catch (...) {
      std::lock_guard lock(mutex_);
      errors_[i] = std::current_exception();
    }
    {
      std::lock_guard lock(mutex_);
      if (++finished_ == count_) done_.notify_all();
    }
  }
}

void WorkerPool::worker_loop() {
  std::size_t seen = 0;
  for (;;) {
    {
      std::unique_lock lock(mutex_);
      wake_.wait(lock, [&] { return stop_ || generation_ != seen; });
      if (stop_) return;
      seen = generation_;
    }
    drain();
  }
}

void WorkerPool::parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  {
    std::lock_guard lock(mutex_);
    job_ = &fn;
    count_ = count;
    next_ = 0;
    finished_ = 0;
    errors_.assign(count, nullptr);
    ++generation_;
  }
  wake_.notify_all();
  drain();
  std::vector<std::exception_ptr> errors;
  {
    std::unique_lock lock(mutex_);
    done_.wait(lock, [&] { return finished_ == count_; });
    job_ = nullptr;
    errors.swap(errors_);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

int PararealConfig::ratio() const { return substep_count(0.0, dt_coarse, dt_fine); }

void PararealConfig::validate() const {
  if (s < 1) throw ConfigError("parareal s must be >= 1");
  if (!(dt_coarse > 0.0) || !(dt_fine > 0.0)) throw ConfigError("time steps must be positive");
  ratio();
  if (max_iter < 1 || max_iter > s) throw ConfigError("parareal max_iter must lie in [1, s]");
  if (!(tol >= 0.0)) throw ConfigError("parareal tol must be non-negative");
  if (workers < 1) throw ConfigError("workers must be >= 1");
}

std::vector<Field> coarse_sweep(const Field& u0, int s, const Propagator& coarse) {
  if (s < 1) throw ConfigError("coarse_sweep needs s >= 1");
  std::vector<Field> traj{u0};
  traj.reserve(static_cast<std::size_t>(s) + 1);
  for (int n = 0; n < s; ++n) traj.push_back(coarse(traj.back()));
  return traj;
}

std::vector<Field> fine_trajectory(const Field& u0, int s, const Propagator& fine) {
  return coarse_sweep(u0, s, fine);
}

bool converged(std::span<const Field> prev, std::span<const Field> curr, double tol) {
  if (prev.size() != curr.size()) throw StructuralError("converged: trajectory lengths differ");
  for (std::size_t j = 0; j < prev.size(); ++j) {
    if (!(sup_diff(prev[j].data(), curr[j].data()) < tol)) return false;
  }
  return true;
}

PararealResult parareal_run(const Field& u0, const PararealConfig& cfg, const Propagator& coarse,
                            const Propagator& fine, const PararealOptions& options) {
  cfg.validate();
  const int s = cfg.s;
  if (options.fine_reference && options.fine_reference->size() != static_cast<std::size_t>(s) + 1) {
    throw StructuralError("fine reference must hold s + 1 states");
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const auto start = Clock::now();

  PararealResult result;
  std::vector<Field>& traj = result.trajectory;
  // cached_coarse[n] = G(U^{k-1}_n)
  std::vector<Field> cached_coarse(s);

  traj.reserve(static_cast<std::size_t>(s) + 1);
  traj.push_back(u0);
  for (int n = 0; n < s; ++n) {
    cached_coarse[n] = coarse(traj[n]);
    traj.push_back(cached_coarse[n]);
  }
  {
    IterationRecord rec;
    rec.k = 0;
    rec.sup_increment = nan;
    rec.t_coarse_s = seconds_since(start);
    rec.t_wall_s = rec.t_coarse_s;
    rec.coarse_calls = s;
    rec.rel_l2_vs_fine = options.fine_reference ? max_rel_error(traj, *options.fine_reference) : nan;
    result.trace.records.push_back(rec);
  }
  if (options.on_iteration) options.on_iteration(0, traj);

  WorkerPool pool(cfg.workers);
  std::vector<Field> fine_out(s);
  for (int k = 1; k <= cfg.max_iter; ++k) {
    IterationRecord rec;
    rec.k = k;

    // Fine sweep over the slices that can still change: n = k-1 .. s-1.
    const auto fine_start = Clock::now();
    const std::size_t first = static_cast<std::size_t>(k - 1);
    pool.parallel_for(static_cast<std::size_t>(s) - first, [&](std::size_t i) {
      const std::size_t n = first + i;
      fine_out[n] = fine(traj[n]);
    });
    rec.t_fine_s = seconds_since(fine_start);
    rec.fine_calls = s - k + 1;

    // Correction sweep. U^k_{k-1} = U^{k-1}_{k-1}, so the correction at
    // n = k-1 cancels and U^k_k is the fine value itself.
    const auto coarse_start = Clock::now();
    double increment = 0.0;
    std::vector<Field> next(traj.begin(), traj.begin() + k);
    next.reserve(traj.size());
    next.push_back(fine_out[k - 1]);
    for (int n = k; n < s; ++n) {
      Field g_new = coarse(next[n]);
      Field updated(g_new.grid_ptr());
      const auto gn = g_new.data();
      const auto fo = fine_out[n].data();
      const auto go = cached_coarse[n].data();
      auto up = updated.data();
      for (std::size_t p = 0; p < up.size(); ++p) up[p] = gn[p] + fo[p] - go[p];
      cached_coarse[n] = std::move(g_new);
      next.push_back(std::move(updated));
      ++rec.coarse_calls;
    }
    rec.t_coarse_s = seconds_since(coarse_start);

    for (int j = 0; j <= s; ++j) {
      if (!next[j].all_finite()) {
        std::ostringstream msg;
        msg << "parareal iterate became non-finite at iteration " << k << ", slice " << j;
        throw NumericalError(msg.str());
      }
      increment = std::max(increment, sup_diff(next[j].data(), traj[j].data()));
    }
    traj.swap(next);
    rec.sup_increment = increment;
    rec.rel_l2_vs_fine = options.fine_reference ? max_rel_error(traj, *options.fine_reference) : nan;
    rec.t_wall_s = seconds_since(start);
    result.trace.records.push_back(rec);
    if (options.on_iteration) options.on_iteration(k, traj);

    if (increment < cfg.tol) {
      result.trace.converged = true;
      break;
    }
  }
  return result;
}

SpeedupEstimate speedup_model(int s, int k, int c, double t_nn, double t_num) {
  if (k > s) throw DomainError("speedup_model requires k <= s");
  if (s < 1 || k < 1 || c < 1 || !(t_nn > 0.0) || !(t_num > 0.0)) {
    throw DomainError("speedup_model arguments must be positive");
  }
  const double sd = s, kd = k, cd = c;
  SpeedupEstimate e;
  e.total_time = cd * kd * t_num + (2.0 * sd - kd) * (kd + 1.0) / 2.0 * t_nn;
  e.speedup = cd * sd * t_num / e.total_time;
  e.bound = std::min(sd / kd, 2.0 * cd * sd * t_num / ((2.0 * sd - kd) * (kd + 1.0) * t_nn));
  return e;
}

double predicted_time(int s, int k, int c, double t_nn, double t_num, int workers, int hardware_threads) {
  if (k > s || k < 0) throw DomainError("predicted_time requires 0 <= k <= s");
  const long w = std::max(1, std::min(workers, std::max(1, hardware_threads)));
  double coarse = 0.0;
  for (int j = 0; j <= k; ++j) coarse += static_cast<double>(s - j);
  double fine_batches = 0.0;
  for (int j = 1; j <= k; ++j) fine_batches += static_cast<double>((s - j + 1 + w - 1) / w);
  return coarse * t_nn + fine_batches * c * t_num;
}

BenchCalibration calibrate(const Field& u0, const PararealConfig& cfg, const Propagator& coarse,
                           const StepperConfig& fine, int repeats) {
  BenchCalibration cal;
  cal.hardware_threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const Propagator fine_prop = make_fine_propagator(fine, cfg.dt_coarse);
  std::vector<double> coarse_times, fine_times;
  Field probe = u0;
  for (int r = 0; r < std::max(1, repeats); ++r) {
    auto t0 = Clock::now();
    Field g = coarse(probe);
    coarse_times.push_back(seconds_since(t0));
    t0 = Clock::now();
    Field f = fine_prop(probe);
    fine_times.push_back(seconds_since(t0));
    probe = f;
  }
  std::sort(coarse_times.begin(), coarse_times.end());
  std::sort(fine_times.begin(), fine_times.end());
  cal.t_nn = coarse_times[coarse_times.size() / 2];
  cal.t_num = fine_times[fine_times.size() / 2] / cfg.ratio();
  return cal;
}

BenchResult bench(const Field& u0, const PararealConfig& cfg, const Propagator& coarse, const StepperConfig& fine,
                  const std::vector<int>& worker_counts) {
  cfg.validate();
  BenchResult out;
  out.calibration = calibrate(u0, cfg, coarse, fine);
  const Propagator fine_prop = make_fine_propagator(fine, cfg.dt_coarse);

  const auto base_start = Clock::now();
  const std::vector<Field> reference = fine_trajectory(u0, cfg.s, fine_prop);
  out.baseline_s = seconds_since(base_start);

  for (int w : worker_counts) {
    PararealConfig run_cfg = cfg;
    run_cfg.workers = w;
    const PararealResult res = parareal_run(u0, run_cfg, coarse, fine_prop);
    for (const IterationRecord& rec : res.trace.records) {
      if (rec.k == 0) continue;
      BenchRow row;
      row.workers = w;
      row.k = rec.k;
      row.t_wall_s = rec.t_wall_s;
      row.t_model_s = predicted_time(cfg.s, rec.k, cfg.ratio(), out.calibration.t_nn, out.calibration.t_num, w,
                                     out.calibration.hardware_threads);
      row.baseline_s = out.baseline_s;
      out.rows.push_back(row);
    }
    out.iterations.push_back(res.trace.iterations());
    out.converged.push_back(res.trace.converged);
  }
  return out;
}

}  // namespace acpit
