// Copyright (c) 2026, acpit developers
// SPDX-License-Identifier: Apache-2.0

#include "acpit/trainer.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <numeric>
#include <sstream>

#include "acpit/error.hpp"
#include "acpit/parareal.hpp"

namespace acpit {
namespace {

constexpr double kDivergenceLimit = 1e6;
constexpr double kTrainingAmplitude = 0.9;

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  // Any fixed injective-looking combination works; random_value hashes it.
  return seed * 0x100000001b3ULL + stream * 0x9e3779b97f4a7c15ULL + index;
}

// Fisher-Yates with draws from the counter-based generator, so partitions do
// not depend on the standard library's distribution implementations.
std::vector<int> permutation(int count, std::uint64_t seed) {
  std::vector<int> idx(count);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = count - 1; i > 0; --i) {
    const double u = 0.5 * (random_value(seed, static_cast<std::uint64_t>(i), 1.0) + 1.0);
    const int j = std::min(i, static_cast<int>(u * (i + 1)));
    std::swap(idx[i], idx[j]);
  }
  return idx;
}

class Optimizer {
 public:
  Optimizer(const TrainConfig& cfg, const ModelParams& params) : cfg_(cfg) {
    const std::size_t count = params.parameter_count();
    if (cfg.optimizer == OptimizerKind::Adam) {
      m_.assign(count, 0.0);
      v_.assign(count, 0.0);
    }
  }

  void apply(ModelParams& params, const ModelParams& grads, long update_index, long total_updates) {
    double lr = cfg_.learning_rate;
    if (cfg_.cosine_decay && total_updates > 0) {
      lr *= 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(update_index) / total_updates));
    }
    ++t_;
    std::size_t q = 0;
    auto& tensors = params.tensors();
    const auto& gt = grads.tensors();
    if (cfg_.optimizer == OptimizerKind::GradientDescent) {
      for (std::size_t i = 0; i < tensors.size(); ++i) {
        for (std::size_t j = 0; j < tensors[i].data.size(); ++j) tensors[i].data[j] -= lr * gt[i].data[j];
      }
      return;
    }
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < tensors.size(); ++i) {
      for (std::size_t j = 0; j < tensors[i].data.size(); ++j, ++q) {
        const double g = gt[i].data[j];
        m_[q] = kBeta1 * m_[q] + (1.0 - kBeta1) * g;
        v_[q] = kBeta2 * v_[q] + (1.0 - kBeta2) * g * g;
        tensors[i].data[j] -= lr * (m_[q] / c1) / (std::sqrt(v_[q] / c2) + kEps);
      }
    }
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  const TrainConfig& cfg_;
  std::vector<double> m_;
  std::vector<double> v_;
  long t_ = 0;
};

}  // namespace

std::string_view to_string(OptimizerKind kind) { return kind == OptimizerKind::Adam ? "adam" : "sgd"; }

OptimizerKind parse_optimizer(std::string_view text) {
  if (text == "adam") return OptimizerKind::Adam;
  if (text == "sgd" || text == "gd") return OptimizerKind::GradientDescent;
  throw ConfigError("unknown optimizer '" + std::string(text) + "' (expected adam|sgd)");
}

void TrainConfig::validate() const {
  if (r_total < 1 || subsets < 1 || subset_size < 1 || inner_updates < 1) {
    throw ConfigError("training counts must all be >= 1");
  }
  if (r_total != subsets * subset_size) {
    throw ConfigError("r_total must equal subsets * subset_size");
  }
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(dt > 0.0) || !(t_train > 0.0)) throw ConfigError("training dt and t_train must be positive");
  steps_per_subset();
}

int TrainConfig::steps_per_subset() const { return substep_count(0.0, t_train, dt); }

long TrainConfig::total_updates() const {
  return static_cast<long>(epochs) * subsets * steps_per_subset() * inner_updates;
}

std::vector<Field> generate_training_ics(const TrainConfig& cfg, const GridPtr& grid, const PhysicsParams&) {
  std::vector<Field> ics;
  ics.reserve(cfg.r_total);
  for (int r = 0; r < cfg.r_total; ++r) {
    ics.push_back(ic_random(grid, kTrainingAmplitude, derive_seed(cfg.seed, 1, static_cast<std::uint64_t>(r))));
  }
  return ics;
}

TrainResult train(const TrainConfig& cfg, const ArchSpec& arch, const PhysicsParams& physics, const GridPtr& grid,
                  const TrainOptions& options) {
  cfg.validate();
  physics.validate();
  arch.validate();
  if (arch.dim != grid->dim()) throw ConfigError("architecture and grid dimensions differ");
  if (arch.kind != physics.kind) throw ConfigError("architecture and physics model kinds differ");

  TrainResult result{ModelParams::initialize(arch, cfg.init_seed.value_or(cfg.seed)), {}};
  if (cfg.epochs == 0) return result;

  StepperConfig scheme;
  scheme.dt = cfg.dt;
  scheme.physics = physics;

  const std::vector<Field> ics = generate_training_ics(cfg, grid, physics);
  const int steps = cfg.steps_per_subset();
  const long total_updates = cfg.total_updates();
  result.log.reserve(static_cast<std::size_t>(total_updates));
  Optimizer optimizer(cfg, result.params);
  std::string last_checkpoint;
  long update_index = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto order = permutation(cfg.r_total, derive_seed(cfg.seed, 2, static_cast<std::uint64_t>(epoch)));
    for (int subset = 0; subset < cfg.subsets; ++subset) {
      std::vector<Field> batch;
      for (int j = 0; j < cfg.subset_size; ++j) batch.push_back(ics[order[subset * cfg.subset_size + j]]);

      for (int step = 0; step < steps; ++step) {
        for (int update = 0; update < cfg.inner_updates; ++update) {
          LossAndGrad lg;
          try {
            lg = loss_and_grad(result.params, batch, scheme);
          } catch (const NumericalError&) {
            throw DivergenceError("training diverged: non-finite loss", last_checkpoint);
          }
          if (!(lg.loss <= kDivergenceLimit)) {
            std::ostringstream msg;
            msg << "training diverged: loss " << lg.loss << " at epoch " << epoch << " step " << step;
            throw DivergenceError(msg.str(), last_checkpoint);
          }
          TrainLogRow row{epoch, subset, step, update, lg.loss};
          result.log.push_back(row);
          if (options.on_update) options.on_update(row);
          optimizer.apply(result.params, lg.grads, update_index++, total_updates);
          if (!result.params.all_finite()) throw DivergenceError("training diverged: non-finite weights", last_checkpoint);
        }
        // The updated network's prediction becomes the next (constant) input.
        SurrogateEvaluator eval(result.params, grid->n());
        for (Field& u : batch) eval.forward(u.data(), u.data());
        if (options.on_step) options.on_step(epoch, subset, step, batch);
      }
    }
    if (!options.checkpoint_dir.empty()) {
      std::filesystem::create_directories(options.checkpoint_dir);
      const auto path = options.checkpoint_dir / ("model_e" + std::to_string(epoch) + ".acnn");
      save_checkpoint(result.params, path);
      last_checkpoint = path.string();
    }
  }
  return result;
}

StabilityResult stability_study(const ArchSpec& arch, const TrainConfig& cfg, const PhysicsParams& physics,
                                const GridPtr& grid, int n_runs, const EvalProblem& problem, int workers,
                                bool force_identical_seeds) {
  if (n_runs < 2) throw ConfigError("stability_study needs at least 2 runs");
  if (problem.sample_every < 1 || problem.steps < 1) throw ConfigError("invalid evaluation problem");
  if (std::abs(problem.fine.dt - cfg.dt) > 1e-15 * cfg.dt) {
    throw ConfigError("evaluation stepper dt must equal the training dt");
  }

  // Fine reference at each sample step.
  std::vector<Field> reference{problem.u0};
  std::vector<int> sample_steps{0};
  {
    CnStepper stepper(problem.u0.grid_ptr(), problem.fine);
    Field u = problem.u0;
    for (int step = 1; step <= problem.steps; ++step) {
      stepper.step(u.data(), u.data());
      if (step % problem.sample_every == 0 || step == problem.steps) {
        reference.push_back(u);
        sample_steps.push_back(step);
      }
    }
  }

  std::vector<std::vector<double>> errors(n_runs);
  std::vector<bool> ok(n_runs, false);
  WorkerPool pool(std::max(1, workers));
  pool.parallel_for(static_cast<std::size_t>(n_runs), [&](std::size_t run) {
    TrainConfig run_cfg = cfg;
    const std::uint64_t base = cfg.init_seed.value_or(cfg.seed);
    run_cfg.init_seed = force_identical_seeds ? base : base + run;
    try {
      const TrainResult trained = train(run_cfg, arch, physics, grid);
      SurrogateEvaluator eval(trained.params, problem.u0.grid().n());
      Field u = problem.u0;
      std::vector<double> errs{rel_l2_error(u, reference[0]).value};
      std::size_t next = 1;
      for (int step = 1; step <= problem.steps; ++step) {
        eval.forward(u.data(), u.data());
        if (next < sample_steps.size() && step == sample_steps[next]) {
          errs.push_back(rel_l2_error(u, reference[next]).value);
          ++next;
        }
      }
      errors[run] = std::move(errs);
      ok[run] = true;
    } catch (const Error&) {
      ok[run] = false;
    }
  });

  StabilityResult result;
  std::vector<int> good;
  for (int r = 0; r < n_runs; ++r) {
    if (ok[r]) {
      good.push_back(r);
    } else {
      result.failed_runs.push_back(r);
    }
  }
  for (std::size_t t = 0; t < sample_steps.size(); ++t) {
    StabilityRow row;
    row.time = sample_steps[t] * problem.fine.dt;
    row.n_runs = static_cast<int>(good.size());
    if (!good.empty()) {
      double mean = 0.0;
      for (int r : good) mean += errors[r][t];
      mean /= static_cast<double>(good.size());
      double var = 0.0;
      for (int r : good) var += (errors[r][t] - mean) * (errors[r][t] - mean);
      row.mean_err = mean;
      row.std_err = good.size() > 1 ? std::sqrt(var / static_cast<double>(good.size() - 1)) : 0.0;
    }
    result.rows.push_back(row);
  }
  return result;
}

}  // namespace acpit
