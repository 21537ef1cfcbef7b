// Copyright (c) 2026, acpit developers
// SPDX-License-Identifier: Apache-2.0

// Exercises the shared library through its C interface only.
#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "acpit/acpit.h"

namespace {

struct Snapshots {
  std::vector<long> steps;
  std::vector<double> first_values;
};

void collect(void* user, long step, double, const acpit_field* u) {
  auto* s = static_cast<Snapshots*>(user);
  s->steps.push_back(step);
  s->first_values.push_back(acpit_field_data(u)[0]);
}

}  // namespace

TEST(CApi, ErrorsCarryStatusAndMessage) {
  acpit_grid* g = nullptr;
  EXPECT_EQ(acpit_grid_create(5, 8, 1.0, &g), ACPIT_ERR_CONFIG);
  EXPECT_EQ(g, nullptr);
  EXPECT_NE(std::string(acpit_last_error()).find("dim"), std::string::npos);
  EXPECT_STREQ(acpit_status_name(ACPIT_ERR_IO), "io");

  acpit_field* f = nullptr;
  EXPECT_EQ(acpit_field_read("/nonexistent/path.acf", &f), ACPIT_ERR_IO);
  acpit_model* m = nullptr;
  EXPECT_EQ(acpit_model_load("/nonexistent/model.acnn", &m), ACPIT_ERR_IO);
  EXPECT_EQ(acpit_grid_create(2, 8, 1.0, nullptr), ACPIT_ERR_CONFIG);
}

TEST(CApi, FieldLifecycleAndIo) {
  acpit_grid* g = nullptr;
  ASSERT_EQ(acpit_grid_create(2, 16, 1.0, &g), ACPIT_OK);
  EXPECT_EQ(acpit_grid_size(g), 256u);
  EXPECT_EQ(acpit_grid_spacing(g), 1.0 / 16);
  acpit_field* u = nullptr;
  ASSERT_EQ(acpit_ic_random(g, 0.9, 7, &u), ACPIT_OK);
  const auto path = (std::filesystem::temp_directory_path() / "acpit_capi.acf").string();
  ASSERT_EQ(acpit_field_write(u, path.c_str()), ACPIT_OK);
  acpit_field* v = nullptr;
  ASSERT_EQ(acpit_field_read(path.c_str(), &v), ACPIT_OK);
  double err = 1.0;
  int absolute = 1;
  ASSERT_EQ(acpit_rel_l2_error(v, u, &err, &absolute), ACPIT_OK);
  EXPECT_EQ(err, 0.0);
  EXPECT_EQ(absolute, 0);
  std::remove(path.c_str());
  acpit_field_destroy(v);
  acpit_field_destroy(u);
  acpit_grid_destroy(g);
}

TEST(CApi, FineSolverAndReferenceRun) {
  acpit_grid* g = nullptr;
  ASSERT_EQ(acpit_grid_create(2, 8, 1.0, &g), ACPIT_OK);
  acpit_field* u = nullptr;
  ASSERT_EQ(acpit_field_create(g, &u), ACPIT_OK);
  for (size_t i = 0; i < acpit_field_size(u); ++i) acpit_field_data_mut(u)[i] = 0.5;
  acpit_stepper_config cfg = acpit_stepper_defaults();
  EXPECT_EQ(cfg.dt, 1e-3);
  EXPECT_EQ(cfg.picard_tol, 1e-12);

  acpit_field* next = nullptr;
  int iters = 0;
  ASSERT_EQ(acpit_cn_step(u, &cfg, &next, &iters), ACPIT_OK);
  EXPECT_GT(acpit_field_data(next)[0], 0.5);
  EXPECT_GE(iters, 1);

  Snapshots snaps;
  ASSERT_EQ(acpit_reference_run(u, 0.25, &cfg, 100, collect, nullptr, &snaps), ACPIT_OK);
  EXPECT_EQ(snaps.steps, (std::vector<long>{0, 100, 200, 250}));

  acpit_stepper_config bad = cfg;
  bad.dt = -1.0;
  acpit_field* out = nullptr;
  EXPECT_EQ(acpit_cn_step(u, &bad, &out, nullptr), ACPIT_ERR_CONFIG);
  EXPECT_EQ(acpit_fine_propagate(u, 0.0, 0.0105, &cfg, &out), ACPIT_ERR_CONFIG);

  acpit_field_destroy(next);
  acpit_field_destroy(u);
  acpit_grid_destroy(g);
}

TEST(CApi, ModelAndParareal) {
  acpit_grid* g = nullptr;
  ASSERT_EQ(acpit_grid_create(2, 8, 1.0, &g), ACPIT_OK);
  acpit_arch arch = acpit_arch_defaults(2, ACPIT_CLASSIC);
  EXPECT_EQ(arch.channels, 4);
  EXPECT_EQ(arch.res_blocks, 2);
  acpit_model* m = nullptr;
  ASSERT_EQ(acpit_model_init(&arch, 1, &m), ACPIT_OK);
  EXPECT_EQ(acpit_model_parameter_count(m), 669u);

  const auto path = (std::filesystem::temp_directory_path() / "acpit_capi.acnn").string();
  ASSERT_EQ(acpit_model_save(m, path.c_str()), ACPIT_OK);
  acpit_model* loaded = nullptr;
  ASSERT_EQ(acpit_model_load(path.c_str(), &loaded), ACPIT_OK);
  std::remove(path.c_str());

  acpit_field* u0 = nullptr;
  ASSERT_EQ(acpit_ic_random(g, 0.9, 3, &u0), ACPIT_OK);
  acpit_field* a = nullptr;
  acpit_field* b = nullptr;
  ASSERT_EQ(acpit_model_forward(m, u0, &a), ACPIT_OK);
  ASSERT_EQ(acpit_model_forward(loaded, u0, &b), ACPIT_OK);
  for (size_t i = 0; i < acpit_field_size(a); ++i) EXPECT_EQ(acpit_field_data(a)[i], acpit_field_data(b)[i]);

  acpit_parareal_config pc{4, 0.01, 1e-3, 1e-10, 4, 2, 10};
  acpit_stepper_config fine = acpit_stepper_defaults();
  fine.physics.epsilon = 0.05;
  acpit_parareal_result* res = nullptr;
  ASSERT_EQ(acpit_parareal_run(u0, &pc, loaded, &fine, 1, &res), ACPIT_OK) << acpit_last_error();
  EXPECT_EQ(acpit_parareal_slices(res), 5);
  const int iters = acpit_parareal_iterations(res);
  EXPECT_GE(iters, 1);
  acpit_iteration rec{};
  ASSERT_EQ(acpit_parareal_record(res, iters, &rec), ACPIT_OK);
  EXPECT_EQ(rec.k, iters);
  EXPECT_EQ(acpit_parareal_record(res, iters + 1, &rec), ACPIT_ERR_DOMAIN);
  EXPECT_EQ(acpit_parareal_slice(res, 5), nullptr);
  acpit_parareal_result_destroy(res);

  double total = 0.0, speedup = 0.0, bound = 0.0;
  ASSERT_EQ(acpit_speedup_model(10, 2, 100, 0.1, 1.0, &total, &speedup, &bound), ACPIT_OK);
  EXPECT_NEAR(speedup, 4.933, 1e-3);
  EXPECT_EQ(acpit_speedup_model(10, 11, 100, 0.1, 1.0, &total, &speedup, &bound), ACPIT_ERR_DOMAIN);

  acpit_field_destroy(a);
  acpit_field_destroy(b);
  acpit_field_destroy(u0);
  acpit_model_destroy(loaded);
  acpit_model_destroy(m);
  acpit_grid_destroy(g);
}
