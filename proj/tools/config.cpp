// Copyright (c) 2026, acpit developers
// SPDX-License-Identifier: Apache-2.0

#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace acpit_cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

const std::string* section_of(const std::string& key) {
  for (const auto& [k, sec] : known_keys()) {
    if (k == key) return &sec;
  }
  return nullptr;
}

[[noreturn]] void fail(const std::string& origin, const std::string& key, const std::string& what) {
  throw ConfigError(origin + ": " + key + ": " + what);
}

class Reader {
 public:
  explicit Reader(const Assignments& a) : a_(a) {}

  bool has(const std::string& key) const { return a_.values.count(key) != 0; }

  void get(const std::string& key, double& out) const {
    const auto* e = find(key);
    if (!e) return;
    const std::string& v = e->value;
    double x = 0.0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(x)) {
      fail(e->origin, key, "expected a real number, got '" + v + "'");
    }
    out = x;
  }

  void get(const std::string& key, int& out) const {
    const auto* e = find(key);
    if (!e) return;
    const std::string& v = e->value;
    int x = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size()) fail(e->origin, key, "expected an integer, got '" + v + "'");
    out = x;
  }

  void get(const std::string& key, std::uint64_t& out) const {
    const auto* e = find(key);
    if (!e) return;
    const std::string& v = e->value;
    std::uint64_t x = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
      fail(e->origin, key, "expected a non-negative integer, got '" + v + "'");
    }
    out = x;
  }

  void get(const std::string& key, bool& out) const {
    const auto* e = find(key);
    if (!e) return;
    if (e->value == "true" || e->value == "1") {
      out = true;
    } else if (e->value == "false" || e->value == "0") {
      out = false;
    } else {
      fail(e->origin, key, "expected true or false, got '" + e->value + "'");
    }
  }

  void get(const std::string& key, std::string& out) const {
    if (const auto* e = find(key)) out = e->value;
  }

  std::string origin(const std::string& key) const {
    const auto* e = find(key);
    return e ? e->origin : "default";
  }

 private:
  const Assignments::Entry* find(const std::string& key) const {
    const auto it = a_.values.find(key);
    return it == a_.values.end() ? nullptr : &it->second;
  }
  const Assignments& a_;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

const std::vector<std::pair<std::string, std::string>>& known_keys() {
  static const std::vector<std::pair<std::string, std::string>> keys = {
      {"kind", "physics"},         {"epsilon", "physics"},
      {"dim", "grid"},             {"n", "grid"},
      {"length", "grid"},          {"ic", "ic"},
      {"ic_amplitude", "ic"},      {"ic_seed", "ic"},
      {"dt_fine", "fine"},         {"picard_tol", "fine"},
      {"picard_max_iter", "fine"}, {"dt_reference", "fine"},
      {"dt_coarse", "coarse"},     {"checkpoint", "coarse"},
      {"coarse_composition", "coarse"},
      {"s", "parareal"},           {"t_final", "parareal"},
      {"tol", "parareal"},         {"max_iter", "parareal"},
      {"workers", "parareal"},     {"r_total", "train"},
      {"subsets", "train"},        {"subset_size", "train"},
      {"inner_updates", "train"},  {"t_train", "train"},
      {"train_dt", "train"},       {"epochs", "train"},
      {"learning_rate", "train"},  {"train_seed", "train"},
      {"optimizer", "train"},      {"cosine_decay", "train"},
      {"stability_runs", "train"}, {"directory", "output"},
      {"snapshot_every", "output"},
  };
  return keys;
}

Assignments parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open config file " + path);
  Assignments a;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string origin = path + ":" + std::to_string(lineno);
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(origin + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      const auto& keys = known_keys();
      const bool known = std::any_of(keys.begin(), keys.end(), [&](const auto& kv) { return kv.second == section; });
      if (!known) throw ConfigError(origin + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(origin + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string* sec = section_of(key);
    if (!sec) throw ConfigError(origin + ": unknown key '" + key + "'");
    if (section.empty()) throw ConfigError(origin + ": key '" + key + "' outside of a section");
    if (*sec != section) throw ConfigError(origin + ": key '" + key + "' belongs to [" + *sec + "], not [" + section + "]");
    if (value.empty()) throw ConfigError(origin + ": key '" + key + "' has no value");
    if (a.values.count(key)) {
      throw ConfigError(origin + ": duplicate key '" + key + "' (first set at " + a.values[key].origin + ")");
    }
    a.values[key] = {value, origin};
  }
  return a;
}

void apply_override(Assignments& a, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("flag: expected key=value, got '" + assignment + "'");
  std::string key = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  const auto dot = key.find('.');
  if (dot != std::string::npos) {
    const std::string section = key.substr(0, dot);
    key = key.substr(dot + 1);
    const std::string* sec = section_of(key);
    if (sec && *sec != section) throw ConfigError("flag: key '" + key + "' belongs to [" + *sec + "]");
  }
  if (!section_of(key)) throw ConfigError("flag: unknown key '" + key + "'");
  if (value.empty()) throw ConfigError("flag: key '" + key + "' has no value");
  a.values[key] = {value, "flag"};
}

RunConfig resolve(const Assignments& a, std::optional<int> env_workers) {
  const Reader r(a);
  RunConfig c;
  r.get("dim", c.dim);
  if (c.dim != 2 && c.dim != 3) fail(r.origin("dim"), "dim", "must be 2 or 3");

  // Dimension-dependent defaults.
  if (c.dim == 3) {
    c.epsilon = 0.02;
    c.n = 32;
    c.s = 50;
    c.tol = 1e-8;
    c.ic = "star";
  }

  r.get("kind", c.kind);
  r.get("epsilon", c.epsilon);
  r.get("n", c.n);
  r.get("length", c.length);
  r.get("ic", c.ic);
  r.get("ic_amplitude", c.ic_amplitude);
  r.get("ic_seed", c.ic_seed);
  r.get("dt_fine", c.dt_fine);
  r.get("picard_tol", c.picard_tol);
  r.get("picard_max_iter", c.picard_max_iter);
  r.get("dt_reference", c.dt_reference);
  r.get("dt_coarse", c.dt_coarse);
  r.get("checkpoint", c.checkpoint);
  r.get("coarse_composition", c.coarse_composition);
  r.get("s", c.s);
  r.get("tol", c.tol);
  r.get("workers", c.workers);
  r.get("r_total", c.r_total);
  r.get("subsets", c.subsets);
  r.get("subset_size", c.subset_size);
  r.get("inner_updates", c.inner_updates);
  r.get("t_train", c.t_train);
  r.get("train_dt", c.train_dt);
  r.get("epochs", c.epochs);
  r.get("learning_rate", c.learning_rate);
  r.get("train_seed", c.train_seed);
  r.get("optimizer", c.optimizer);
  r.get("cosine_decay", c.cosine_decay);
  r.get("stability_runs", c.stability_runs);
  r.get("directory", c.directory);
  r.get("snapshot_every", c.snapshot_every);

  if (!r.has("workers") && env_workers) c.workers = *env_workers;

  auto positive = [&](const char* key, double v) {
    if (!(v > 0.0)) fail(r.origin(key), key, "must be positive");
  };
  auto at_least = [&](const char* key, int v, int lo) {
    if (v < lo) fail(r.origin(key), key, "must be >= " + std::to_string(lo));
  };
  auto integer_ratio = [](double a, double b) {
    const double q = a / b;
    return std::abs(q - std::round(q)) <= 1e-9 * std::max(1.0, std::abs(q));
  };

  if (c.kind != "classic" && c.kind != "mass") fail(r.origin("kind"), "kind", "expected classic or mass");
  positive("epsilon", c.epsilon);
  at_least("n", c.n, 4);
  positive("length", c.length);
  if (c.ic != "bubbles" && c.ic != "random" && c.ic != "star") {
    fail(r.origin("ic"), "ic", "expected bubbles, random or star");
  }
  if (c.ic == "bubbles" && c.dim != 2) fail(r.origin("ic"), "ic", "bubbles requires dim = 2");
  if (c.ic == "star" && c.dim != 3) fail(r.origin("ic"), "ic", "star requires dim = 3");
  positive("ic_amplitude", c.ic_amplitude);
  positive("dt_fine", c.dt_fine);
  positive("picard_tol", c.picard_tol);
  at_least("picard_max_iter", c.picard_max_iter, 1);
  positive("dt_reference", c.dt_reference);
  positive("dt_coarse", c.dt_coarse);
  if (!integer_ratio(c.dt_coarse, c.dt_fine)) {
    fail(r.origin("dt_coarse"), "dt_coarse", "must be an integer multiple of dt_fine");
  }
  at_least("coarse_composition", c.coarse_composition, 1);

  // s and t_final describe the same horizon; either may be given.
  if (r.has("t_final")) {
    r.get("t_final", c.t_final);
    positive("t_final", c.t_final);
    if (!integer_ratio(c.t_final, c.dt_coarse)) {
      fail(r.origin("t_final"), "t_final", "must be an integer multiple of dt_coarse");
    }
    const int implied = static_cast<int>(std::lround(c.t_final / c.dt_coarse));
    if (r.has("s") && implied != c.s) {
      fail(r.origin("t_final"), "t_final", "inconsistent with s * dt_coarse = " + fmt(c.s * c.dt_coarse));
    }
    c.s = implied;
  }
  at_least("s", c.s, 1);
  c.t_final = c.s * c.dt_coarse;

  if (!r.has("max_iter")) c.max_iter = c.s;
  r.get("max_iter", c.max_iter);
  if (c.max_iter < 1 || c.max_iter > c.s) fail(r.origin("max_iter"), "max_iter", "must lie in [1, s]");
  if (!(c.tol >= 0.0)) fail(r.origin("tol"), "tol", "must be non-negative");
  at_least("workers", c.workers, 1);

  at_least("r_total", c.r_total, 1);
  at_least("subsets", c.subsets, 1);
  at_least("subset_size", c.subset_size, 1);
  if (c.r_total != c.subsets * c.subset_size) fail(r.origin("r_total"), "r_total", "must equal subsets * subset_size");
  at_least("inner_updates", c.inner_updates, 1);
  positive("t_train", c.t_train);
  positive("train_dt", c.train_dt);
  at_least("epochs", c.epochs, 0);
  positive("learning_rate", c.learning_rate);
  if (c.optimizer != "adam" && c.optimizer != "sgd") fail(r.origin("optimizer"), "optimizer", "expected adam or sgd");
  at_least("stability_runs", c.stability_runs, 0);
  if (c.stability_runs == 1) fail(r.origin("stability_runs"), "stability_runs", "needs 0 (off) or at least 2 runs");
  at_least("snapshot_every", c.snapshot_every, 1);
  if (c.directory.empty()) fail(r.origin("directory"), "directory", "must not be empty");
  return c;
}

std::string render(const RunConfig& c) {
  std::ostringstream o;
  o << "[physics]\nkind = " << c.kind << "\nepsilon = " << fmt(c.epsilon) << "\n\n";
  o << "[grid]\ndim = " << c.dim << "\nn = " << c.n << "\nlength = " << fmt(c.length) << "\n\n";
  o << "[ic]\nic = " << c.ic << "\nic_amplitude = " << fmt(c.ic_amplitude) << "\nic_seed = " << c.ic_seed << "\n\n";
  o << "[fine]\ndt_fine = " << fmt(c.dt_fine) << "\npicard_tol = " << fmt(c.picard_tol)
    << "\npicard_max_iter = " << c.picard_max_iter << "\ndt_reference = " << fmt(c.dt_reference) << "\n\n";
  o << "[coarse]\ndt_coarse = " << fmt(c.dt_coarse) << "\n";
  if (!c.checkpoint.empty()) o << "checkpoint = " << c.checkpoint << "\n";
  o << "coarse_composition = " << c.coarse_composition << "\n\n";
  o << "[parareal]\ns = " << c.s << "\ntol = " << fmt(c.tol) << "\nmax_iter = " << c.max_iter
    << "\nworkers = " << c.workers << "\n\n";
  o << "[train]\nr_total = " << c.r_total << "\nsubsets = " << c.subsets << "\nsubset_size = " << c.subset_size
    << "\ninner_updates = " << c.inner_updates << "\nt_train = " << fmt(c.t_train) << "\ntrain_dt = " << fmt(c.train_dt)
    << "\nepochs = " << c.epochs << "\nlearning_rate = " << fmt(c.learning_rate) << "\ntrain_seed = " << c.train_seed
    << "\noptimizer = " << c.optimizer << "\ncosine_decay = " << (c.cosine_decay ? "true" : "false")
    << "\nstability_runs = " << c.stability_runs << "\n\n";
  o << "[output]\ndirectory = " << c.directory << "\nsnapshot_every = " << c.snapshot_every << "\n";
  return o.str();
}

}  // namespace acpit_cli
