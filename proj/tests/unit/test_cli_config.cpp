// Copyright (c) 2026, acpit developers
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "config.hpp"

using namespace acpit_cli;

namespace {

std::string write_tmp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << text;
  return path.string();
}

// Message of the ConfigError thrown by fn, or "" if none.
template <typename Fn>
std::string error_of(Fn fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(CliConfig, ParsesSectionsAndComments) {
  const auto path = write_tmp("acpit_cfg_ok.cfg",
                              "# desk run\n[physics]\nkind = mass  # inline\nepsilon=0.02\n\n[grid]\nn = 32\n"
                              "[parareal]\ns = 10\n");
  const RunConfig c = resolve(parse_config_file(path), std::nullopt);
  EXPECT_EQ(c.kind, "mass");
  EXPECT_DOUBLE_EQ(c.epsilon, 0.02);
  EXPECT_EQ(c.n, 32);
  EXPECT_EQ(c.s, 10);
  EXPECT_EQ(c.max_iter, 10);
  EXPECT_DOUBLE_EQ(c.t_final, 1.0);
}

TEST(CliConfig, RejectsMalformedFilesWithLineNumbers) {
  const auto unknown = write_tmp("acpit_cfg_unknown.cfg", "[grid]\nn = 8\nbogus = 1\n");
  EXPECT_NE(error_of([&] { parse_config_file(unknown); }).find(":3: unknown key 'bogus'"), std::string::npos);
  const auto dup = write_tmp("acpit_cfg_dup.cfg", "[grid]\nn = 8\nn = 16\n");
  EXPECT_NE(error_of([&] { parse_config_file(dup); }).find(":3: duplicate key"), std::string::npos);
  const auto wrong = write_tmp("acpit_cfg_wrong.cfg", "[grid]\nepsilon = 0.1\n");
  EXPECT_NE(error_of([&] { parse_config_file(wrong); }).find("belongs to [physics]"), std::string::npos);
  const auto nosec = write_tmp("acpit_cfg_nosec.cfg", "n = 8\n");
  EXPECT_FALSE(error_of([&] { parse_config_file(nosec); }).empty());
  const auto badsec = write_tmp("acpit_cfg_badsec.cfg", "[nonsense]\n");
  EXPECT_FALSE(error_of([&] { parse_config_file(badsec); }).empty());
  EXPECT_THROW(parse_config_file("/nonexistent/acpit.cfg"), std::ios_base::failure);
}

TEST(CliConfig, ValueValidation) {
  auto resolve_with = [](const std::string& kv) {
    Assignments a;
    apply_override(a, kv);
    return resolve(a, std::nullopt);
  };
  for (const char* bad : {"n=abc", "n=8.5", "epsilon=-1", "kind=other", "dt_coarse=0.0015", "max_iter=101",
                          "r_total=15", "stability_runs=1", "optimizer=rmsprop", "ic=star", "cosine_decay=maybe",
                          "epsilon=nan"}) {
    EXPECT_FALSE(error_of([&] { resolve_with(bad); }).empty()) << bad;
  }
  Assignments a;
  EXPECT_THROW(apply_override(a, "grid.epsilon=1"), ConfigError);
  apply_override(a, "physics.epsilon=0.05");
  EXPECT_DOUBLE_EQ(resolve(a, std::nullopt).epsilon, 0.05);
}

TEST(CliConfig, HorizonConsistency) {
  Assignments a;
  apply_override(a, "t_final=5");
  EXPECT_EQ(resolve(a, std::nullopt).s, 50);
  apply_override(a, "s=40");
  EXPECT_THROW(resolve(a, std::nullopt), ConfigError);
  apply_override(a, "s=50");
  EXPECT_NO_THROW(resolve(a, std::nullopt));
}

TEST(CliConfig, ThreeDimensionalDefaults) {
  Assignments a;
  apply_override(a, "dim=3");
  const RunConfig c = resolve(a, std::nullopt);
  EXPECT_EQ(c.n, 32);
  EXPECT_EQ(c.s, 50);
  EXPECT_DOUBLE_EQ(c.t_final, 5.0);
  EXPECT_DOUBLE_EQ(c.tol, 1e-8);
  EXPECT_EQ(c.ic, "star");
}

TEST(CliConfig, WorkerPrecedence) {
  Assignments a;
  EXPECT_EQ(resolve(a, std::nullopt).workers, 1);
  EXPECT_EQ(resolve(a, 6).workers, 6);
  apply_override(a, "workers=3");
  EXPECT_EQ(resolve(a, 6).workers, 3);
}

TEST(CliConfig, RenderRoundTrip) {
  Assignments a;
  for (const char* kv : {"kind=mass", "epsilon=0.013", "ic=random", "ic_seed=18446744073709551615", "dt_fine=2e-4",
                         "dt_coarse=0.1", "checkpoint=runs/m.acnn", "cosine_decay=true", "tol=1e-7"}) {
    apply_override(a, kv);
  }
  const RunConfig c = resolve(a, std::nullopt);
  const auto path = write_tmp("acpit_cfg_render.cfg", render(c));
  const RunConfig d = resolve(parse_config_file(path), std::nullopt);
  EXPECT_EQ(render(c), render(d));
  EXPECT_EQ(d.ic_seed, 18446744073709551615ull);
  EXPECT_DOUBLE_EQ(d.epsilon, 0.013);
  EXPECT_EQ(d.checkpoint, "runs/m.acnn");
  EXPECT_TRUE(d.cosine_decay);
}
