// Copyright (c) 2026, acpit developers
// SPDX-License-Identifier: Apache-2.0

// acpit command-line tool. Talks to the solver exclusively through the C
// interface in acpit/acpit.h.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure,
// 4 I/O failure, 1 anything else. Failures print one line to stderr:
//   acpit: error class=<class> message="<text>"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "acpit/acpit.h"
#include "config.hpp"

namespace fs = std::filesystem;
using acpit_cli::ConfigError;
using acpit_cli::RunConfig;

namespace {

// Failure reported by the library, carrying its status.
class ApiError : public std::runtime_error {
 public:
  ApiError(acpit_status status, const std::string& what) : std::runtime_error(what), status_(status) {}
  acpit_status status() const { return status_; }

 private:
  acpit_status status_;
};

class IoFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void check(acpit_status st) {
  if (st != ACPIT_OK) throw ApiError(st, acpit_last_error());
}

template <typename T, void (*Destroy)(T*)>
struct Deleter {
  void operator()(T* p) const { Destroy(p); }
};
using GridHandle = std::unique_ptr<acpit_grid, Deleter<acpit_grid, acpit_grid_destroy>>;
using FieldHandle = std::unique_ptr<acpit_field, Deleter<acpit_field, acpit_field_destroy>>;
using ModelHandle = std::unique_ptr<acpit_model, Deleter<acpit_model, acpit_model_destroy>>;
using ResultHandle =
    std::unique_ptr<acpit_parareal_result, Deleter<acpit_parareal_result, acpit_parareal_result_destroy>>;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot read " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return hex.str();
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw IoFailure("cannot write " + path.string());
  os << std::setprecision(17);
  return os;
}

// Timestamped run directory with the resolved config and a checksum manifest.
class RunDir {
 public:
  RunDir(const RunConfig& cfg, const std::string& command) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", &tm);
    const fs::path base = fs::path(cfg.directory) / (command + "-" + stamp);
    path_ = base;
    for (int i = 2; fs::exists(path_); ++i) path_ = base.string() + "-" + std::to_string(i);
    std::error_code ec;
    fs::create_directories(path_, ec);
    if (ec) throw IoFailure("cannot create run directory " + path_.string() + ": " + ec.message());
    auto os = open_out(path_ / "config.resolved.cfg");
    os << "# resolved configuration for `acpit " << command << "`\n" << acpit_cli::render(cfg);
  }

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

  void finish() const {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(path_)) {
      if (e.is_regular_file() && e.path().filename() != "manifest") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    auto os = open_out(path_ / "manifest");
    for (const auto& f : files) {
      os << sha256_file(f) << "  " << fs::file_size(f) << "  " << fs::relative(f, path_).generic_string() << "\n";
    }
    std::cout << "run directory: " << path_.string() << "\n";
  }

 private:
  fs::path path_;
};

acpit_physics physics_of(const RunConfig& c) {
  return {c.kind == "mass" ? ACPIT_MASS_CONSERVATIVE : ACPIT_CLASSIC, c.epsilon};
}

acpit_stepper_config stepper_of(const RunConfig& c, double dt) {
  acpit_stepper_config s = acpit_stepper_defaults();
  s.physics = physics_of(c);
  s.dt = dt;
  s.picard_tol = c.picard_tol;
  s.picard_max_iter = c.picard_max_iter;
  return s;
}

acpit_parareal_config parareal_of(const RunConfig& c) {
  return {c.s, c.dt_coarse, c.dt_fine, c.tol, c.max_iter, c.workers, c.coarse_composition};
}

GridHandle make_grid(const RunConfig& c) {
  acpit_grid* g = nullptr;
  check(acpit_grid_create(c.dim, c.n, c.length, &g));
  return GridHandle(g);
}

FieldHandle make_ic(const RunConfig& c, const acpit_grid* g) {
  acpit_field* u = nullptr;
  if (c.ic == "bubbles") {
    check(acpit_ic_bubbles(g, c.epsilon, &u));
  } else if (c.ic == "star") {
    check(acpit_ic_star(g, c.epsilon, &u));
  } else {
    check(acpit_ic_random(g, c.ic_amplitude, c.ic_seed, &u));
  }
  return FieldHandle(u);
}

ModelHandle load_model(const RunConfig& c) {
  if (c.checkpoint.empty()) {
    throw ConfigError("missing model: set [coarse] checkpoint to a trained .acnn file (see `acpit train`)");
  }
  if (!fs::exists(c.checkpoint)) throw IoFailure("missing model: checkpoint '" + c.checkpoint + "' does not exist");
  acpit_model* m = nullptr;
  check(acpit_model_load(c.checkpoint.c_str(), &m));
  ModelHandle model(m);
  const acpit_arch arch = acpit_model_arch(model.get());
  if (arch.dim != c.dim) throw ConfigError("checkpoint dimension does not match [grid] dim");
  if ((arch.kind == ACPIT_MASS_CONSERVATIVE) != (c.kind == "mass")) {
    throw ConfigError("checkpoint model kind does not match [physics] kind");
  }
  return model;
}

void write_metadata(const RunDir& run, const RunConfig& c, const std::string& command,
                    const std::vector<std::pair<std::string, std::string>>& extra = {}) {
  auto os = open_out(run / "run.meta");
  os << "command = " << command << "\nversion = " << acpit_version() << "\n";
  if (c.ic == "star") os << "star_formula = " << acpit_star_formula() << "\n";
  if (c.ic == "random") os << "random_generator = amplitude * (2 * (mix64(mix64(seed) ^ index * 0x9e3779b97f4a7c15) >> 11) * 2^-53 - 1), mix64 = splitmix64 finalizer\n";
  for (const auto& [k, v] : extra) os << k << " = " << v << "\n";
}

// Writes `t<index>.acf` files plus a snapshots.csv index.
class SnapshotWriter {
 public:
  explicit SnapshotWriter(const fs::path& dir) : dir_(dir), index_(open_out(dir / "snapshots.csv")) {
    index_ << "step,time,file\n" << std::flush;
  }

  void write(long step, double time, const acpit_field* u) {
    const std::string name = "t" + std::to_string(step) + ".acf";
    check(acpit_field_write(u, (dir_ / name).c_str()));
    index_ << step << "," << fmt(time) << "," << name << "\n" << std::flush;
  }

 private:
  fs::path dir_;
  std::ofstream index_;
};

// ---------------------------------------------------------------------------
// Commands

void cmd_gen_ic(const RunConfig& c) {
  RunDir run(c, "gen-ic");
  write_metadata(run, c, "gen-ic");
  const GridHandle g = make_grid(c);
  const FieldHandle u = make_ic(c, g.get());
  SnapshotWriter snaps(run.path());
  snaps.write(0, 0.0, u.get());
  double energy = 0.0;
  check(acpit_discrete_energy(u.get(), physics_of(c), &energy));
  std::cout << "mass " << fmt(acpit_total_mass(u.get())) << " energy " << fmt(energy) << "\n";
  run.finish();
}

struct RefRunState {
  SnapshotWriter* snaps;
  std::ofstream* diag;
  bool failed = false;
  std::string error;
};

void cmd_fine_run(const RunConfig& c) {
  RunDir run(c, "fine-run");
  write_metadata(run, c, "fine-run", {{"dt", fmt(c.dt_reference)}, {"t_final", fmt(c.t_final)}});
  const GridHandle g = make_grid(c);
  const FieldHandle u0 = make_ic(c, g.get());
  const acpit_stepper_config cfg = stepper_of(c, c.dt_reference);
  SnapshotWriter snaps(run.path());
  auto diag = open_out(run / "diagnostics.csv");
  diag << "step,time,mass,energy,picard_iters\n";
  RefRunState state{&snaps, &diag, false, {}};
  auto on_snap = [](void* user, long step, double time, const acpit_field* u) {
    auto* s = static_cast<RefRunState*>(user);
    if (s->failed) return;
    try {
      s->snaps->write(step, time, u);
    } catch (const std::exception& e) {
      s->failed = true;
      s->error = e.what();
    }
  };
  auto on_diag = [](void* user, long step, double time, double mass, double energy, int iters) {
    auto* s = static_cast<RefRunState*>(user);
    *s->diag << step << "," << fmt(time) << "," << fmt(mass) << "," << fmt(energy) << "," << iters << "\n";
  };
  check(acpit_reference_run(u0.get(), c.t_final, &cfg, c.snapshot_every, on_snap, on_diag, &state));
  if (state.failed) throw IoFailure(state.error);
  diag.close();
  run.finish();
}

acpit_train_config train_config_of(const RunConfig& c) {
  acpit_train_config t = acpit_train_defaults();
  t.r_total = c.r_total;
  t.subsets = c.subsets;
  t.subset_size = c.subset_size;
  t.inner_updates = c.inner_updates;
  t.t_train = c.t_train;
  t.dt = c.train_dt;
  t.epochs = c.epochs;
  t.learning_rate = c.learning_rate;
  t.seed = c.train_seed;
  t.optimizer = c.optimizer == "sgd" ? ACPIT_OPT_SGD : ACPIT_OPT_ADAM;
  t.cosine_decay = c.cosine_decay ? 1 : 0;
  return t;
}

void cmd_train(const RunConfig& c) {
  RunDir run(c, "train");
  write_metadata(run, c, "train");
  const GridHandle g = make_grid(c);
  acpit_arch arch = acpit_arch_defaults(c.dim, physics_of(c).kind);
  acpit_train_config t = train_config_of(c);
  const std::string ckpt_dir = run.path().string();
  t.checkpoint_dir = ckpt_dir.c_str();

  auto log = open_out(run / "train_log.csv");
  log << "epoch,subset,step,update,loss\n";
  auto on_update = [](void* user, int epoch, int subset, int step, int update, double loss) {
    *static_cast<std::ofstream*>(user) << epoch << "," << subset << "," << step << "," << update << "," << fmt(loss)
                                       << "\n";
  };
  acpit_model* m = nullptr;
  check(acpit_train(&t, &arch, physics_of(c), g.get(), on_update, &log, &m));
  const ModelHandle model(m);
  log.close();
  check(acpit_model_save(model.get(), (run / "model.acnn").c_str()));

  if (c.stability_runs >= 2) {
    const FieldHandle u0 = make_ic(c, g.get());
    auto csv = open_out(run / "stability.csv");
    csv << "time,mean_err,std_err,n_runs\n";
    auto on_row = [](void* user, double time, double mean, double sd, int n) {
      *static_cast<std::ofstream*>(user) << fmt(time) << "," << fmt(mean) << "," << fmt(sd) << "," << n << "\n";
    };
    const int steps = static_cast<int>(std::lround(c.t_train / c.train_dt));
    int failed = 0;
    t.checkpoint_dir = nullptr;
    check(acpit_stability_study(&t, &arch, physics_of(c), g.get(), c.stability_runs, u0.get(), steps,
                                c.snapshot_every, c.workers, on_row, &csv, &failed));
    if (failed > 0) std::cerr << "acpit: warning: " << failed << " stability run(s) failed and were skipped\n";
  }
  run.finish();
}

struct RolloutState {
  SnapshotWriter* snaps;
  double dt;
};

void cmd_coarse_run(const RunConfig& c) {
  const ModelHandle model = load_model(c);
  RunDir run(c, "coarse-run");
  write_metadata(run, c, "coarse-run", {{"checkpoint_sha256", sha256_file(c.checkpoint)}});
  const GridHandle g = make_grid(c);
  const FieldHandle u0 = make_ic(c, g.get());
  SnapshotWriter snaps(run.path());
  RolloutState state{&snaps, c.dt_coarse};
  auto on_snap = [](void* user, long step, double, const acpit_field* u) {
    auto* s = static_cast<RolloutState*>(user);
    s->snaps->write(step, static_cast<double>(step) * s->dt, u);
  };
  check(acpit_model_rollout(model.get(), u0.get(), c.coarse_composition, c.s, on_snap, &state));
  run.finish();
}

void cmd_parareal(const RunConfig& c, bool with_reference) {
  const ModelHandle model = load_model(c);
  RunDir run(c, "parareal");
  write_metadata(run, c, "parareal", {{"checkpoint_sha256", sha256_file(c.checkpoint)}});
  const GridHandle g = make_grid(c);
  const FieldHandle u0 = make_ic(c, g.get());
  const acpit_parareal_config pc = parareal_of(c);
  const acpit_stepper_config fine = stepper_of(c, c.dt_fine);
  acpit_parareal_result* r = nullptr;
  check(acpit_parareal_run(u0.get(), &pc, model.get(), &fine, with_reference ? 1 : 0, &r));
  const ResultHandle result(r);

  auto trace = open_out(run / "trace.csv");
  trace << "k,sup_increment,rel_l2_vs_fine,t_coarse_s,t_fine_s,t_wall_s\n";
  for (int k = 0; k <= acpit_parareal_iterations(result.get()); ++k) {
    acpit_iteration rec{};
    check(acpit_parareal_record(result.get(), k, &rec));
    trace << rec.k << "," << fmt(rec.sup_increment) << "," << fmt(rec.rel_l2_vs_fine) << "," << fmt(rec.t_coarse_s)
          << "," << fmt(rec.t_fine_s) << "," << fmt(rec.t_wall_s) << "\n";
  }
  trace.close();
  SnapshotWriter snaps(run.path());
  for (int j = 0; j < acpit_parareal_slices(result.get()); ++j) {
    snaps.write(j, j * c.dt_coarse, acpit_parareal_slice(result.get(), j));
  }
  std::cout << "iterations " << acpit_parareal_iterations(result.get()) << " converged "
            << (acpit_parareal_converged(result.get()) ? "yes" : "no") << "\n";
  run.finish();
}

void cmd_bench(const RunConfig& c, const std::vector<int>& worker_counts) {
  const ModelHandle model = load_model(c);
  RunDir run(c, "bench");
  write_metadata(run, c, "bench", {{"checkpoint_sha256", sha256_file(c.checkpoint)}});
  const GridHandle g = make_grid(c);
  const FieldHandle u0 = make_ic(c, g.get());
  const acpit_parareal_config pc = parareal_of(c);
  const acpit_stepper_config fine = stepper_of(c, c.dt_fine);
  auto csv = open_out(run / "bench.csv");
  csv << "workers,k,t_wall_s,t_model_s,baseline_s\n";
  auto on_row = [](void* user, int workers, int k, double wall, double model_s, double base) {
    *static_cast<std::ofstream*>(user) << workers << "," << k << "," << fmt(wall) << "," << fmt(model_s) << ","
                                       << fmt(base) << "\n";
  };
  double t_nn = 0.0, t_num = 0.0;
  check(acpit_bench(u0.get(), &pc, model.get(), &fine, worker_counts.data(), worker_counts.size(), on_row, &csv, &t_nn,
                    &t_num));
  csv.close();
  auto cal = open_out(run / "calibration.csv");
  cal << "t_nn,t_num\n" << fmt(t_nn) << "," << fmt(t_num) << "\n";
  cal.close();
  run.finish();
}

struct SnapshotIndex {
  std::vector<double> times;
  std::vector<fs::path> files;
};

SnapshotIndex read_index(const fs::path& dir) {
  std::ifstream in(dir / "snapshots.csv");
  if (!in) throw IoFailure("no snapshots.csv in " + dir.string());
  SnapshotIndex idx;
  std::string line;
  std::getline(in, line);
  if (line != "step,time,file") throw IoFailure((dir / "snapshots.csv").string() + ": unexpected header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto a = line.find(',');
    const auto b = line.find(',', a + 1);
    if (a == std::string::npos || b == std::string::npos) throw IoFailure("malformed row in " + dir.string());
    idx.times.push_back(std::stod(line.substr(a + 1, b - a - 1)));
    idx.files.push_back(dir / line.substr(b + 1));
  }
  return idx;
}

void cmd_compare(const RunConfig& c, const fs::path& a_dir, const fs::path& ref_dir) {
  const SnapshotIndex a = read_index(a_dir);
  const SnapshotIndex ref = read_index(ref_dir);
  RunDir run(c, "compare");
  write_metadata(run, c, "compare", {{"run", a_dir.string()}, {"reference", ref_dir.string()}});
  auto csv = open_out(run / "errors.csv");
  csv << "time,rel_l2,absolute,status\n";
  auto match = [](const SnapshotIndex& idx, double t) -> long {
    for (std::size_t i = 0; i < idx.times.size(); ++i) {
      if (std::abs(idx.times[i] - t) <= 1e-9 * std::max(1.0, std::abs(t))) return static_cast<long>(i);
    }
    return -1;
  };
  int matched = 0, missing = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < a.times.size(); ++i) {
    const long j = match(ref, a.times[i]);
    if (j < 0) {
      csv << fmt(a.times[i]) << ",,,missing\n";
      ++missing;
      continue;
    }
    acpit_field* fu = nullptr;
    acpit_field* fr = nullptr;
    check(acpit_field_read(a.files[i].c_str(), &fu));
    const FieldHandle u(fu);
    check(acpit_field_read(ref.files[j].c_str(), &fr));
    const FieldHandle r(fr);
    double err = 0.0;
    int absolute = 0;
    check(acpit_rel_l2_error(u.get(), r.get(), &err, &absolute));
    csv << fmt(a.times[i]) << "," << fmt(err) << "," << absolute << ",ok\n";
    worst = std::max(worst, err);
    ++matched;
  }
  // Reference times with no counterpart are flagged as well.
  for (std::size_t j = 0; j < ref.times.size(); ++j) {
    if (match(a, ref.times[j]) < 0) {
      csv << fmt(ref.times[j]) << ",,,missing\n";
      ++missing;
    }
  }
  csv.close();
  std::cout << "matched " << matched << " missing " << missing << " max_rel_l2 " << fmt(worst) << "\n";
  run.finish();
}

std::optional<int> env_workers() {
  const char* v = std::getenv("ACPIT_WORKERS");
  if (!v || !*v) return std::nullopt;
  try {
    std::size_t pos = 0;
    const int w = std::stoi(v, &pos);
    if (pos != std::string(v).size()) throw std::invalid_argument(v);
    return w;
  } catch (const std::exception&) {
    throw ConfigError(std::string("ACPIT_WORKERS: expected an integer, got '") + v + "'");
  }
}

int report(const char* klass, const std::string& message, int code) {
  std::string escaped;
  for (char ch : message) {
    if (ch == '"' || ch == '\\') escaped += '\\';
    escaped += ch == '\n' ? ' ' : ch;
  }
  std::cerr << "acpit: error class=" << klass << " message=\"" << escaped << "\"\n";
  return code;
}

int exit_code(acpit_status st) {
  switch (st) {
    case ACPIT_ERR_CONFIG:
    case ACPIT_ERR_DOMAIN:
    case ACPIT_ERR_STRUCTURAL:
      return 2;
    case ACPIT_ERR_NONCONVERGENCE:
    case ACPIT_ERR_DIVERGENCE:
    case ACPIT_ERR_NUMERICAL:
      return 3;
    case ACPIT_ERR_FORMAT:
    case ACPIT_ERR_IO:
      return 4;
    default:
      return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acpit: parallel-in-time Allen-Cahn solver with a learned coarse propagator"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<int> workers_flag;
  std::string out_dir;
  app.add_option("-c,--config", config_path, "Run configuration file");
  app.add_option("--set", overrides, "Override a config key: key=value or section.key=value")->take_all();
  app.add_option("--workers", workers_flag, "Parallel fine-sweep width (overrides config and ACPIT_WORKERS)");
  app.add_option("--out", out_dir, "Parent directory for run directories (overrides [output] directory)");

  auto* gen_ic = app.add_subcommand("gen-ic", "Write the configured initial condition");
  auto* fine_run = app.add_subcommand("fine-run", "Sequential reference run with dt_reference");
  auto* train = app.add_subcommand("train", "Train the surrogate coarse propagator");
  auto* coarse_run = app.add_subcommand("coarse-run", "Roll out the surrogate over s coarse steps");
  auto* parareal = app.add_subcommand("parareal", "Parareal with the surrogate as coarse propagator");
  bool no_reference = false;
  parareal->add_flag("--no-reference", no_reference, "Skip the sequential fine trajectory (no error column)");
  auto* bench = app.add_subcommand("bench", "Time Parareal for several worker counts against the cost model");
  std::vector<int> worker_counts{1, 2, 4, 8};
  bench->add_option("--worker-counts", worker_counts, "Worker counts to measure")->delimiter(',');
  auto* compare = app.add_subcommand("compare", "Relative L2 error series of RUN against REFERENCE");
  std::string run_a, run_ref;
  compare->add_option("run", run_a, "Run directory with snapshots.csv")->required();
  compare->add_option("reference", run_ref, "Reference run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report("usage", e.what(), 2);
  }

  try {
    acpit_cli::Assignments assigned;
    if (!config_path.empty()) assigned = acpit_cli::parse_config_file(config_path);
    for (const auto& o : overrides) acpit_cli::apply_override(assigned, o);
    if (workers_flag) acpit_cli::apply_override(assigned, "workers=" + std::to_string(*workers_flag));
    if (!out_dir.empty()) acpit_cli::apply_override(assigned, "directory=" + out_dir);
    const RunConfig cfg = acpit_cli::resolve(assigned, env_workers());

    if (*gen_ic) cmd_gen_ic(cfg);
    if (*fine_run) cmd_fine_run(cfg);
    if (*train) cmd_train(cfg);
    if (*coarse_run) cmd_coarse_run(cfg);
    if (*parareal) cmd_parareal(cfg, !no_reference);
    if (*bench) cmd_bench(cfg, worker_counts);
    if (*compare) cmd_compare(cfg, run_a, run_ref);
    return 0;
  } catch (const ConfigError& e) {
    return report("config", e.what(), 2);
  } catch (const ApiError& e) {
    return report(acpit_status_name(e.status()), e.what(), exit_code(e.status()));
  } catch (const IoFailure& e) {
    return report("io", e.what(), 4);
  } catch (const std::ios_base::failure& e) {
    return report("io", e.what(), 4);
  } catch (const fs::filesystem_error& e) {
    return report("io", e.what(), 4);
  } catch (const std::exception& e) {
    return report("internal", e.what(), 1);
  }
}
