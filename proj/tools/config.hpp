// Copyright (c) 2026, acpit developers
// SPDX-License-Identifier: Apache-2.0

// Text run configuration for the acpit command-line tool.
//
// Format: `key = value` lines grouped under `[section]` headers; `#` starts a
// comment. Every key belongs to exactly one section and may appear once.
// Unknown keys, duplicate keys, keys in the wrong section and malformed
// values are errors reported with their line number.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace acpit_cli {

/// Invalid configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  // [physics]
  std::string kind = "classic";
  double epsilon = 0.01;
  // [grid]
  int dim = 2;
  int n = 64;
  double length = 1.0;
  // [ic]
  std::string ic = "bubbles";
  double ic_amplitude = 0.9;
  std::uint64_t ic_seed = 0;
  // [fine]
  double dt_fine = 1e-3;
  double picard_tol = 1e-12;
  int picard_max_iter = 100;
  double dt_reference = 1e-4;
  // [coarse]
  double dt_coarse = 0.1;
  std::string checkpoint;
  int coarse_composition = 100;
  // [parareal]
  int s = 100;
  double t_final = 10.0;
  double tol = 1e-6;
  int max_iter = 100;
  int workers = 1;
  // [train]
  int r_total = 16;
  int subsets = 4;
  int subset_size = 4;
  int inner_updates = 5;
  double t_train = 1.0;
  double train_dt = 1e-3;
  int epochs = 3;
  double learning_rate = 1e-3;
  std::uint64_t train_seed = 0;
  std::string optimizer = "adam";
  bool cosine_decay = false;
  int stability_runs = 0;
  // [output]
  std::string directory = "runs";
  int snapshot_every = 100;
};

/// Raw `key -> value` assignments in file order, before defaults apply.
struct Assignments {
  struct Entry {
    std::string value;
    std::string origin;  ///< "file:line" or "flag"
  };
  std::map<std::string, Entry> values;
};

/// Parses a config file into assignments (syntax, duplicates, unknown keys).
Assignments parse_config_file(const std::string& path);
/// Parses `key=value` (or `section.key=value`) from the command line and
/// overrides any earlier assignment.
void apply_override(Assignments& a, const std::string& assignment);

/// Applies defaults that depend on the dimension, converts and validates
/// every value. `env_workers` is the environment default for `workers`,
/// used unless the key was assigned explicitly.
RunConfig resolve(const Assignments& a, std::optional<int> env_workers);

/// Fully resolved config in the same text format, round-trip exact.
std::string render(const RunConfig& cfg);

/// Known keys and the section each belongs to.
const std::vector<std::pair<std::string, std::string>>& known_keys();

}  // namespace acpit_cli
