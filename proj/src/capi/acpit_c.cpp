// Copyright (c) 2026, acpit developers
// SPDX-License-Identifier: Apache-2.0

#include "acpit/acpit.h"

#include <memory>
#include <new>
#include <string>

#include "acpit/error.hpp"
#include "acpit/fine_solver.hpp"
#include "acpit/parareal.hpp"
#include "acpit/physics.hpp"
#include "acpit/surrogate.hpp"
#include "acpit/trainer.hpp"

struct acpit_grid {
  acpit::GridPtr grid;
};

struct acpit_field {
  acpit::Field field;
};

struct acpit_model {
  std::shared_ptr<const acpit::ModelParams> params;
};

struct acpit_parareal_result {
  acpit::PararealResult result;
  std::vector<acpit_field> slices;
};

namespace {

thread_local std::string g_last_error;

acpit_status fail(acpit_status status, const char* what) {
  g_last_error = what;
  return status;
}

template <typename Fn>
acpit_status guarded(Fn&& fn) {
  try {
    fn();
    return ACPIT_OK;
  } catch (const acpit::ConfigError& e) {
    return fail(ACPIT_ERR_CONFIG, e.what());
  } catch (const acpit::DomainError& e) {
    return fail(ACPIT_ERR_DOMAIN, e.what());
  } catch (const acpit::StructuralError& e) {
    return fail(ACPIT_ERR_STRUCTURAL, e.what());
  } catch (const acpit::FormatError& e) {
    return fail(ACPIT_ERR_FORMAT, e.what());
  } catch (const acpit::IoError& e) {
    return fail(ACPIT_ERR_IO, e.what());
  } catch (const acpit::NonConvergenceError& e) {
    return fail(ACPIT_ERR_NONCONVERGENCE, e.what());
  } catch (const acpit::DivergenceError& e) {
    std::string msg = e.what();
    if (!e.last_good_checkpoint().empty()) msg += " (last good checkpoint: " + e.last_good_checkpoint() + ")";
    return fail(ACPIT_ERR_DIVERGENCE, msg.c_str());
  } catch (const acpit::NumericalError& e) {
    return fail(ACPIT_ERR_NUMERICAL, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(ACPIT_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(ACPIT_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(ACPIT_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(ACPIT_ERR_INTERNAL, "unknown error");
  }
}

void require(const void* ptr, const char* name) {
  if (!ptr) throw acpit::ConfigError(std::string(name) + " must not be NULL");
}

acpit::ModelKind to_kind(int kind) {
  if (kind != ACPIT_CLASSIC && kind != ACPIT_MASS_CONSERVATIVE) throw acpit::ConfigError("invalid model kind");
  return static_cast<acpit::ModelKind>(kind);
}

acpit::PhysicsParams to_physics(acpit_physics p) {
  acpit::PhysicsParams out;
  out.kind = to_kind(p.kind);
  out.epsilon = p.epsilon;
  out.validate();
  return out;
}

acpit::StepperConfig to_stepper(const acpit_stepper_config* cfg) {
  require(cfg, "stepper config");
  acpit::StepperConfig out;
  out.dt = cfg->dt;
  out.picard_tol = cfg->picard_tol;
  out.picard_max_iter = cfg->picard_max_iter;
  out.physics = to_physics(cfg->physics);
  out.validate();
  return out;
}

acpit::ArchSpec to_arch(const acpit_arch* a) {
  require(a, "architecture");
  acpit::ArchSpec out = acpit::ArchSpec::defaults(a->dim, to_kind(a->kind));
  out.channels = a->channels;
  out.res_blocks = a->res_blocks;
  out.kernel = a->kernel;
  out.validate();
  return out;
}

acpit_arch from_arch(const acpit::ArchSpec& a) {
  return {a.dim, a.channels, a.res_blocks, a.kernel, static_cast<int>(a.kind)};
}

acpit::TrainConfig to_train(const acpit_train_config* c) {
  require(c, "train config");
  acpit::TrainConfig out;
  out.r_total = c->r_total;
  out.subsets = c->subsets;
  out.subset_size = c->subset_size;
  out.inner_updates = c->inner_updates;
  out.t_train = c->t_train;
  out.dt = c->dt;
  out.epochs = c->epochs;
  out.learning_rate = c->learning_rate;
  out.seed = c->seed;
  if (c->has_init_seed) out.init_seed = c->init_seed;
  out.optimizer = c->optimizer == ACPIT_OPT_SGD ? acpit::OptimizerKind::GradientDescent : acpit::OptimizerKind::Adam;
  out.cosine_decay = c->cosine_decay != 0;
  out.validate();
  return out;
}

acpit::PararealConfig to_parareal(const acpit_parareal_config* c) {
  require(c, "parareal config");
  acpit::PararealConfig out;
  out.s = c->s;
  out.dt_coarse = c->dt_coarse;
  out.dt_fine = c->dt_fine;
  out.tol = c->tol;
  out.max_iter = c->max_iter;
  out.workers = c->workers;
  out.validate();
  if (c->coarse_composition < 1) throw acpit::ConfigError("coarse_composition must be >= 1");
  return out;
}

acpit::Propagator coarse_propagator(const acpit_model* model, const acpit_parareal_config* cfg,
                                    const acpit::StepperConfig& fine) {
  if (!model) return acpit::make_fine_propagator(fine, cfg->dt_coarse);
  return acpit::make_surrogate_propagator(model->params, cfg->coarse_composition);
}

acpit_field* wrap(acpit::Field f) { return new acpit_field{std::move(f)}; }

}  // namespace

extern "C" {

const char* acpit_last_error(void) { return g_last_error.c_str(); }

const char* acpit_status_name(acpit_status status) {
  switch (status) {
    case ACPIT_OK: return "ok";
    case ACPIT_ERR_CONFIG: return "config";
    case ACPIT_ERR_DOMAIN: return "domain";
    case ACPIT_ERR_STRUCTURAL: return "structural";
    case ACPIT_ERR_FORMAT: return "format";
    case ACPIT_ERR_IO: return "io";
    case ACPIT_ERR_NONCONVERGENCE: return "nonconvergence";
    case ACPIT_ERR_DIVERGENCE: return "divergence";
    case ACPIT_ERR_NUMERICAL: return "numerical";
    case ACPIT_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* acpit_version(void) { return "1.0.0"; }

acpit_status acpit_grid_create(int dim, int n, double length, acpit_grid** out) {
  return guarded([&] {
    require(out, "out");
    *out = new acpit_grid{acpit::Grid::make(dim, n, length)};
  });
}

void acpit_grid_destroy(acpit_grid* grid) { delete grid; }
int acpit_grid_dim(const acpit_grid* grid) { return grid->grid->dim(); }
int acpit_grid_n(const acpit_grid* grid) { return grid->grid->n(); }
double acpit_grid_length(const acpit_grid* grid) { return grid->grid->length(); }
double acpit_grid_spacing(const acpit_grid* grid) { return grid->grid->h(); }
size_t acpit_grid_size(const acpit_grid* grid) { return grid->grid->size(); }

acpit_status acpit_field_create(const acpit_grid* grid, acpit_field** out) {
  return guarded([&] {
    require(grid, "grid");
    require(out, "out");
    *out = wrap(acpit::Field(grid->grid));
  });
}

acpit_status acpit_field_clone(const acpit_field* field, acpit_field** out) {
  return guarded([&] {
    require(field, "field");
    require(out, "out");
    *out = wrap(field->field);
  });
}

void acpit_field_destroy(acpit_field* field) { delete field; }
size_t acpit_field_size(const acpit_field* field) { return field->field.size(); }
const double* acpit_field_data(const acpit_field* field) { return field->field.data().data(); }
double* acpit_field_data_mut(acpit_field* field) { return field->field.data().data(); }

acpit_status acpit_field_grid(const acpit_field* field, acpit_grid** out) {
  return guarded([&] {
    require(field, "field");
    require(out, "out");
    *out = new acpit_grid{field->field.grid_ptr()};
  });
}

acpit_status acpit_field_write(const acpit_field* field, const char* path) {
  return guarded([&] {
    require(field, "field");
    require(path, "path");
    acpit::write_field(field->field, path);
  });
}

acpit_status acpit_field_read(const char* path, acpit_field** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = wrap(acpit::read_field(path));
  });
}

void acpit_mbp_bounds(int kind, double* lo, double* hi) {
  const acpit::Bounds b = acpit::mbp_bounds(kind == ACPIT_MASS_CONSERVATIVE ? acpit::ModelKind::MassConservative
                                                                            : acpit::ModelKind::Classic);
  if (lo) *lo = b.lo;
  if (hi) *hi = b.hi;
}

acpit_status acpit_ic_bubbles(const acpit_grid* grid, double eps, acpit_field** out) {
  return guarded([&] {
    require(grid, "grid");
    require(out, "out");
    *out = wrap(acpit::ic_bubbles(grid->grid, eps));
  });
}

acpit_status acpit_ic_random(const acpit_grid* grid, double amplitude, uint64_t seed, acpit_field** out) {
  return guarded([&] {
    require(grid, "grid");
    require(out, "out");
    *out = wrap(acpit::ic_random(grid->grid, amplitude, seed));
  });
}

acpit_status acpit_ic_star(const acpit_grid* grid, double eps, acpit_field** out) {
  return guarded([&] {
    require(grid, "grid");
    require(out, "out");
    *out = wrap(acpit::ic_star(grid->grid, eps));
  });
}

const char* acpit_star_formula(void) { return acpit::kStarFormula.data(); }

double acpit_total_mass(const acpit_field* field) { return acpit::total_mass(field->field); }

acpit_status acpit_discrete_energy(const acpit_field* field, acpit_physics physics, double* energy) {
  return guarded([&] {
    require(field, "field");
    require(energy, "energy");
    *energy = acpit::discrete_energy(field->field, to_physics(physics));
  });
}

acpit_status acpit_rel_l2_error(const acpit_field* u, const acpit_field* ref, double* error, int* absolute) {
  return guarded([&] {
    require(u, "u");
    require(ref, "ref");
    require(error, "error");
    const auto e = acpit::rel_l2_error(u->field, ref->field);
    *error = e.value;
    if (absolute) *absolute = e.absolute ? 1 : 0;
  });
}

acpit_stepper_config acpit_stepper_defaults(void) {
  const acpit::StepperConfig d;
  return {{static_cast<int>(d.physics.kind), d.physics.epsilon}, d.dt, d.picard_tol, d.picard_max_iter};
}

acpit_status acpit_cn_step(const acpit_field* u, const acpit_stepper_config* cfg, acpit_field** out,
                           int* picard_iters) {
  return guarded([&] {
    require(u, "u");
    require(out, "out");
    *out = wrap(acpit::cn_step(u->field, to_stepper(cfg), picard_iters));
  });
}

acpit_status acpit_fine_propagate(const acpit_field* u, double t_start, double t_end, const acpit_stepper_config* cfg,
                                  acpit_field** out) {
  return guarded([&] {
    require(u, "u");
    require(out, "out");
    *out = wrap(acpit::fine_propagate(u->field, t_start, t_end, to_stepper(cfg)));
  });
}

acpit_status acpit_reference_run(const acpit_field* u0, double t_final, const acpit_stepper_config* cfg,
                                 int snapshot_every, acpit_snapshot_fn on_snapshot, acpit_diagnostics_fn on_diagnostics,
                                 void* user) {
  return guarded([&] {
    require(u0, "u0");
    acpit::ReferenceRunOptions opts;
    opts.snapshot_every = snapshot_every;
    opts.keep_snapshots = false;
    if (on_snapshot) {
      opts.on_snapshot = [&](long step, double t, const acpit::Field& u) {
        const acpit_field view{u};
        on_snapshot(user, step, t, &view);
      };
    }
    if (on_diagnostics) {
      opts.on_diagnostics = [&](const acpit::DiagnosticsRow& r) {
        on_diagnostics(user, r.step, r.time, r.mass, r.energy, r.picard_iters);
      };
    }
    acpit::reference_run(u0->field, t_final, to_stepper(cfg), opts);
  });
}

acpit_arch acpit_arch_defaults(int dim, int kind) {
  acpit::ArchSpec a = acpit::ArchSpec::defaults(dim, kind == ACPIT_MASS_CONSERVATIVE ? acpit::ModelKind::MassConservative
                                                                                    : acpit::ModelKind::Classic);
  return from_arch(a);
}

acpit_status acpit_model_init(const acpit_arch* arch, uint64_t seed, acpit_model** out) {
  return guarded([&] {
    require(out, "out");
    *out = new acpit_model{std::make_shared<const acpit::ModelParams>(acpit::ModelParams::initialize(to_arch(arch), seed))};
  });
}

acpit_status acpit_model_load(const char* path, acpit_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new acpit_model{std::make_shared<const acpit::ModelParams>(acpit::load_checkpoint(path))};
  });
}

acpit_status acpit_model_save(const acpit_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    acpit::save_checkpoint(*model->params, path);
  });
}

void acpit_model_destroy(acpit_model* model) { delete model; }
acpit_arch acpit_model_arch(const acpit_model* model) { return from_arch(model->params->arch()); }
size_t acpit_model_parameter_count(const acpit_model* model) { return model->params->parameter_count(); }

acpit_status acpit_model_forward(const acpit_model* model, const acpit_field* u, acpit_field** out) {
  return guarded([&] {
    require(model, "model");
    require(u, "u");
    require(out, "out");
    *out = wrap(acpit::forward(*model->params, u->field));
  });
}

acpit_status acpit_model_rollout(const acpit_model* model, const acpit_field* u0, int composition, int steps,
                                 acpit_snapshot_fn on_snapshot, void* user) {
  return guarded([&] {
    require(model, "model");
    require(u0, "u0");
    if (steps < 0) throw acpit::ConfigError("rollout steps must be >= 0");
    const auto g = acpit::make_surrogate_propagator(model->params, composition);
    acpit_field state{u0->field};
    if (on_snapshot) on_snapshot(user, 0, 0.0, &state);
    for (int n = 1; n <= steps; ++n) {
      state.field = g(state.field);
      if (on_snapshot) on_snapshot(user, n, 0.0, &state);
    }
  });
}

acpit_train_config acpit_train_defaults(void) {
  const acpit::TrainConfig d;
  acpit_train_config c{};
  c.r_total = d.r_total;
  c.subsets = d.subsets;
  c.subset_size = d.subset_size;
  c.inner_updates = d.inner_updates;
  c.t_train = d.t_train;
  c.dt = d.dt;
  c.epochs = d.epochs;
  c.learning_rate = d.learning_rate;
  c.seed = d.seed;
  c.init_seed = 0;
  c.has_init_seed = 0;
  c.optimizer = ACPIT_OPT_ADAM;
  c.cosine_decay = d.cosine_decay ? 1 : 0;
  c.checkpoint_dir = nullptr;
  return c;
}

acpit_status acpit_train(const acpit_train_config* cfg, const acpit_arch* arch, acpit_physics physics,
                         const acpit_grid* grid, acpit_train_log_fn on_update, void* user, acpit_model** out) {
  return guarded([&] {
    require(grid, "grid");
    require(out, "out");
    acpit::TrainOptions opts;
    if (cfg && cfg->checkpoint_dir) opts.checkpoint_dir = cfg->checkpoint_dir;
    if (on_update) {
      opts.on_update = [&](const acpit::TrainLogRow& r) { on_update(user, r.epoch, r.subset, r.step, r.update, r.loss); };
    }
    auto result = acpit::train(to_train(cfg), to_arch(arch), to_physics(physics), grid->grid, opts);
    *out = new acpit_model{std::make_shared<const acpit::ModelParams>(std::move(result.params))};
  });
}

acpit_status acpit_stability_study(const acpit_train_config* cfg, const acpit_arch* arch, acpit_physics physics,
                                   const acpit_grid* grid, int n_runs, const acpit_field* eval_u0, int eval_steps,
                                   int sample_every, int workers, acpit_stability_row_fn on_row, void* user,
                                   int* failed_runs) {
  return guarded([&] {
    require(grid, "grid");
    require(eval_u0, "eval_u0");
    const acpit::TrainConfig tc = to_train(cfg);
    acpit::EvalProblem problem;
    problem.u0 = eval_u0->field;
    problem.fine.dt = tc.dt;
    problem.fine.physics = to_physics(physics);
    problem.steps = eval_steps;
    problem.sample_every = sample_every;
    const auto res = acpit::stability_study(to_arch(arch), tc, problem.fine.physics, grid->grid, n_runs, problem, workers);
    if (failed_runs) *failed_runs = static_cast<int>(res.failed_runs.size());
    if (on_row) {
      for (const auto& r : res.rows) on_row(user, r.time, r.mean_err, r.std_err, r.n_runs);
    }
  });
}

acpit_status acpit_parareal_run(const acpit_field* u0, const acpit_parareal_config* cfg, const acpit_model* coarse,
                                const acpit_stepper_config* fine, int with_reference, acpit_parareal_result** out) {
  return guarded([&] {
    require(u0, "u0");
    require(out, "out");
    const acpit::PararealConfig pc = to_parareal(cfg);
    acpit::StepperConfig fc = to_stepper(fine);
    if (std::abs(fc.dt - pc.dt_fine) > 1e-15 * pc.dt_fine) throw acpit::ConfigError("fine dt differs from dt_fine");
    const acpit::Propagator f = acpit::make_fine_propagator(fc, pc.dt_coarse);
    const acpit::Propagator g = coarse_propagator(coarse, cfg, fc);
    std::vector<acpit::Field> reference;
    acpit::PararealOptions opts;
    if (with_reference) {
      reference = acpit::fine_trajectory(u0->field, pc.s, f);
      opts.fine_reference = &reference;
    }
    auto holder = std::make_unique<acpit_parareal_result>();
    holder->result = acpit::parareal_run(u0->field, pc, g, f, opts);
    for (auto& slice : holder->result.trajectory) holder->slices.push_back(acpit_field{slice});
    *out = holder.release();
  });
}

void acpit_parareal_result_destroy(acpit_parareal_result* result) { delete result; }

int acpit_parareal_iterations(const acpit_parareal_result* result) { return result->result.trace.iterations(); }
int acpit_parareal_converged(const acpit_parareal_result* result) { return result->result.trace.converged ? 1 : 0; }

acpit_status acpit_parareal_record(const acpit_parareal_result* result, int k, acpit_iteration* out) {
  return guarded([&] {
    require(result, "result");
    require(out, "out");
    const auto& recs = result->result.trace.records;
    if (k < 0 || k >= static_cast<int>(recs.size())) throw acpit::DomainError("iteration index out of range");
    const auto& r = recs[k];
    *out = {r.k, r.sup_increment, r.rel_l2_vs_fine, r.t_coarse_s, r.t_fine_s, r.t_wall_s};
  });
}

int acpit_parareal_slices(const acpit_parareal_result* result) { return static_cast<int>(result->slices.size()); }

const acpit_field* acpit_parareal_slice(const acpit_parareal_result* result, int j) {
  if (!result || j < 0 || j >= static_cast<int>(result->slices.size())) return nullptr;
  return &result->slices[j];
}

acpit_status acpit_speedup_model(int s, int k, int c, double t_nn, double t_num, double* total_time, double* speedup,
                                 double* bound) {
  return guarded([&] {
    const auto e = acpit::speedup_model(s, k, c, t_nn, t_num);
    if (total_time) *total_time = e.total_time;
    if (speedup) *speedup = e.speedup;
    if (bound) *bound = e.bound;
  });
}

acpit_status acpit_bench(const acpit_field* u0, const acpit_parareal_config* cfg, const acpit_model* coarse,
                         const acpit_stepper_config* fine, const int* worker_counts, size_t n_worker_counts,
                         acpit_bench_row_fn on_row, void* user, double* t_nn, double* t_num) {
  return guarded([&] {
    require(u0, "u0");
    require(worker_counts, "worker_counts");
    const acpit::PararealConfig pc = to_parareal(cfg);
    const acpit::StepperConfig fc = to_stepper(fine);
    const acpit::Propagator g = coarse_propagator(coarse, cfg, fc);
    const std::vector<int> workers(worker_counts, worker_counts + n_worker_counts);
    const auto res = acpit::bench(u0->field, pc, g, fc, workers);
    if (t_nn) *t_nn = res.calibration.t_nn;
    if (t_num) *t_num = res.calibration.t_num;
    if (on_row) {
      for (const auto& r : res.rows) on_row(user, r.workers, r.k, r.t_wall_s, r.t_model_s, r.baseline_s);
    }
  });
}

}  // extern "C"
