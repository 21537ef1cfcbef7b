// Copyright (c) 2026, acpit developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "acpit/fine_solver.hpp"
#include "acpit/surrogate.hpp"

namespace acpit {

enum class OptimizerKind { Adam, GradientDescent };

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view text);

struct TrainConfig {
  int r_total = 16;
  int subsets = 4;
  int subset_size = 4;
  int inner_updates = 5;
  double t_train = 1.0;
  double dt = 1e-3;
  int epochs = 3;
  double learning_rate = 1e-3;
  /// Seeds the training ensemble and its partitions.
  std::uint64_t seed = 0;
  /// Seeds the weight initialization; defaults to `seed`.
  std::optional<std::uint64_t> init_seed;
  OptimizerKind optimizer = OptimizerKind::Adam;
  bool cosine_decay = false;

  void validate() const;
  int steps_per_subset() const;
  long total_updates() const;
};

struct TrainLogRow {
  int epoch = 0;
  int subset = 0;
  int step = 0;
  int update = 0;
  double loss = 0.0;
};

struct TrainOptions {
  /// Per-epoch checkpoints `model_e<k>.acnn` go here when set.
  std::filesystem::path checkpoint_dir;
  std::function<void(const TrainLogRow&)> on_update;
  /// Called after every frozen step with the new batch states.
  std::function<void(int epoch, int subset, int step, std::span<const Field> states)> on_step;
};

struct TrainResult {
  ModelParams params;
  std::vector<TrainLogRow> log;
};

/// R seeded random fields with amplitude 0.9.
std::vector<Field> generate_training_ics(const TrainConfig& cfg, const GridPtr& grid, const PhysicsParams& physics);

/// Self-supervised training over trajectories of the training ensemble. For
/// every subset the batch state is advanced step by step: b optimizer updates
/// on the scheme loss, then the network output from the updated weights is
/// frozen and becomes the next input.
TrainResult train(const TrainConfig& cfg, const ArchSpec& arch, const PhysicsParams& physics, const GridPtr& grid,
                  const TrainOptions& options = {});

struct EvalProblem {
  Field u0;
  /// Reference stepper; its dt must equal the training dt.
  StepperConfig fine;
  int steps = 1000;
  int sample_every = 100;
};

struct StabilityRow {
  double time = 0.0;
  double mean_err = 0.0;
  double std_err = 0.0;
  int n_runs = 0;
};

struct StabilityResult {
  std::vector<StabilityRow> rows;
  std::vector<int> failed_runs;
};

/// Trains `n_runs` models on identical data with distinct initialization
/// seeds (init_seed + run), rolls each out on the evaluation problem and
/// reports the mean and sample standard deviation of the relative L2 error
/// against the fine solver at each sample time.
StabilityResult stability_study(const ArchSpec& arch, const TrainConfig& cfg, const PhysicsParams& physics,
                                const GridPtr& grid, int n_runs, const EvalProblem& problem, int workers = 1,
                                bool force_identical_seeds = false);

}  // namespace acpit
