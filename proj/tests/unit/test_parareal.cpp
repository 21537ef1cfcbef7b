// Copyright (c) 2026, acpit developers
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "acpit/error.hpp"
#include "acpit/parareal.hpp"

using namespace acpit;

namespace {

struct Problem {
  GridPtr grid = Grid::make(2, 16, 1.0);
  StepperConfig fine;
  PararealConfig cfg;
  Propagator f;
  Propagator g;

  explicit Problem(int s = 8) {
    fine.physics = {ModelKind::Classic, 0.03};
    fine.dt = 1e-3;
    cfg.s = s;
    cfg.dt_coarse = 0.02;
    cfg.dt_fine = 1e-3;
    cfg.max_iter = s;
    f = make_fine_propagator(fine, cfg.dt_coarse);
    // Cheap, inexact coarse propagator: one large Crank-Nicolson step.
    StepperConfig coarse = fine;
    coarse.dt = cfg.dt_coarse;
    g = make_fine_propagator(coarse, cfg.dt_coarse);
  }
};

bool bitwise_equal(const std::vector<Field>& a, const std::vector<Field>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::memcmp(a[i].values().data(), b[i].values().data(), a[i].size() * sizeof(double)) != 0) return false;
  }
  return true;
}

}  // namespace

TEST(Config, Validation) {
  PararealConfig cfg;
  EXPECT_EQ(cfg.ratio(), 100);
  EXPECT_NO_THROW(cfg.validate());
  cfg.max_iter = 101;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = PararealConfig{};
  cfg.dt_fine = 3e-3;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = PararealConfig{};
  cfg.workers = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(CoarseSweep, Basics) {
  const auto g = Grid::make(2, 8, 1.0);
  const Field u = ic_random(g, 0.9, 1);
  const Propagator identity = [](const Field& x) { return x; };
  const auto one = coarse_sweep(u, 1, identity);
  ASSERT_EQ(one.size(), 2u);
  const auto flat = coarse_sweep(u, 5, identity);
  for (const Field& x : flat) EXPECT_EQ(x.values(), u.values());

  auto params = std::make_shared<const ModelParams>(ModelParams::initialize(ArchSpec::defaults(2, ModelKind::Classic), 2));
  const auto traj = coarse_sweep(Field(g, 1.0), 4, make_surrogate_propagator(params, 3));
  for (const Field& x : traj) {
    for (double v : x.values()) EXPECT_LE(v, 1.0);
  }
}

TEST(Converged, Cases) {
  const auto g = Grid::make(2, 4, 1.0);
  std::vector<Field> a{Field(g, 0.0), Field(g, 1.0)};
  std::vector<Field> b = a;
  EXPECT_TRUE(converged(a, b, 1e-300));
  b[1][3] += 2e-6;
  EXPECT_FALSE(converged(a, b, 1e-6));
  b = a;
  for (Field& x : b) {
    for (double& v : x.values()) v += 0.5e-6;
  }
  EXPECT_TRUE(converged(a, b, 1e-6));
  b.pop_back();
  EXPECT_THROW(converged(a, b, 1e-6), StructuralError);
}

TEST(Parareal, ExactnessLadderAndTermination) {
  Problem st;
  st.cfg.tol = 0.0;  // never converges early: runs k = 1..s
  const Field u0 = ic_random(st.grid, 0.9, 5);
  const auto fine = fine_trajectory(u0, st.cfg.s, st.f);
  PararealOptions opts;
  opts.fine_reference = &fine;
  int last_k = -1;
  opts.on_iteration = [&](int k, std::span<const Field> traj) {
    last_k = k;
    for (int j = 0; j <= k; ++j) EXPECT_LE(sup_diff(traj[j].data(), fine[j].data()), 1e-10) << "k " << k << " j " << j;
  };
  const PararealResult res = parareal_run(u0, st.cfg, st.g, st.f, opts);
  EXPECT_EQ(last_k, st.cfg.s);
  EXPECT_EQ(res.trace.iterations(), st.cfg.s);
  for (int j = 0; j <= st.cfg.s; ++j) EXPECT_LE(sup_diff(res.trajectory[j].data(), fine[j].data()), 1e-10);

  // error vs fine never grows (small rounding increases tolerated)
  const auto& recs = res.trace.records;
  EXPECT_TRUE(std::isnan(recs[0].sup_increment));
  for (std::size_t k = 1; k < recs.size(); ++k) EXPECT_LE(recs[k].rel_l2_vs_fine, recs[k - 1].rel_l2_vs_fine + 1e-12);

  // worst case: s(s+1)/2 fine propagations in total, s on the critical path
  int fine_calls = 0, coarse_calls = 0;
  for (const auto& r : recs) {
    fine_calls += r.fine_calls;
    coarse_calls += r.coarse_calls;
  }
  EXPECT_EQ(fine_calls, st.cfg.s * (st.cfg.s + 1) / 2);
  EXPECT_EQ(static_cast<int>(recs.size()) - 1, st.cfg.s);
  // coarse: s for the initial sweep plus s - k per iteration
  EXPECT_EQ(coarse_calls, st.cfg.s + st.cfg.s * (st.cfg.s - 1) / 2);
}

TEST(Parareal, FirstIterationMatchesFine) {
  Problem st;
  st.cfg.max_iter = 1;
  const Field u0 = ic_random(st.grid, 0.9, 6);
  const PararealResult res = parareal_run(u0, st.cfg, st.g, st.f);
  EXPECT_LE(sup_diff(res.trajectory[1].data(), st.f(u0).data()), 1e-12);
}

TEST(Parareal, CoarseEqualsFineConvergesImmediately) {
  Problem st;
  st.cfg.tol = 1e-12;
  const Field u0 = ic_random(st.grid, 0.9, 7);
  const PararealResult res = parareal_run(u0, st.cfg, st.f, st.f);
  ASSERT_GE(res.trace.records.size(), 2u);
  EXPECT_LT(res.trace.records[1].sup_increment, 1e-12);
  EXPECT_TRUE(res.trace.converged);
  EXPECT_EQ(res.trace.iterations(), 1);
}

TEST(Parareal, WorkerCountDoesNotChangeResults) {
  Problem st(6);
  st.cfg.tol = 1e-9;
  const Field u0 = ic_random(st.grid, 0.9, 8);
  std::vector<std::vector<Field>> runs;
  for (int w : {1, 3, 4, 8}) {
    st.cfg.workers = w;
    runs.push_back(parareal_run(u0, st.cfg, st.g, st.f).trajectory);
  }
  for (std::size_t i = 1; i < runs.size(); ++i) EXPECT_TRUE(bitwise_equal(runs[0], runs[i]));
}

TEST(WorkerPool, RunsAllAndRethrowsLowestIndex) {
  for (int workers : {1, 4}) {
    WorkerPool pool(workers);
    std::vector<std::atomic<int>> hits(50);
    pool.parallel_for(50, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) EXPECT_EQ(h.load(), 1);
    try {
      pool.parallel_for(20, [&](std::size_t i) {
        if (i == 7 || i == 13) throw std::runtime_error("fail " + std::to_string(i));
      });
      FAIL();
    } catch (const std::runtime_error& e) {
      EXPECT_STREQ(e.what(), "fail 7");
    }
    // pool stays usable after an exception
    std::atomic<int> count{0};
    pool.parallel_for(10, [&](std::size_t) { count++; });
    EXPECT_EQ(count.load(), 10);
  }
}

TEST(SpeedupModel, ClosedForm) {
  const auto limit = speedup_model(10, 2, 100, 1e-15, 1.0);
  EXPECT_NEAR(limit.speedup, 5.0, 1e-9);
  const auto e = speedup_model(10, 2, 100, 0.1, 1.0);
  EXPECT_NEAR(e.speedup, 1.0 / (0.2 + (18.0 * 3.0) / (2.0 * 100.0 * 10.0) * 0.1), 1e-12);
  EXPECT_NEAR(e.speedup, 4.933, 1e-3);
  EXPECT_DOUBLE_EQ(e.total_time, 100.0 * 2.0 + 18.0 * 3.0 / 2.0 * 0.1);
  EXPECT_LE(e.speedup, e.bound + 1e-12);
  EXPECT_LE(speedup_model(10, 10, 100, 0.01, 1.0).speedup, 1.0);
  EXPECT_THROW(speedup_model(10, 11, 100, 0.1, 1.0), DomainError);
}

TEST(SpeedupModel, WorkerAwarePrediction) {
  // With at least s effective workers the prediction is the closed form.
  EXPECT_NEAR(predicted_time(10, 3, 100, 0.1, 1.0, 16, 16), speedup_model(10, 3, 100, 0.1, 1.0).total_time, 1e-12);
  // A single worker performs every fine propagation back to back.
  const double serial = predicted_time(10, 3, 100, 0.1, 1.0, 1, 1);
  EXPECT_NEAR(serial, 100.0 * (10 + 9 + 8) + 0.1 * (10 + 9 + 8 + 7), 1e-9);
  // Extra threads beyond the hardware do not help.
  EXPECT_DOUBLE_EQ(predicted_time(10, 3, 100, 0.1, 1.0, 8, 1), serial);
}
