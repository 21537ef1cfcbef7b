// Copyright (c) 2026, acpit developers
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "acpit/error.hpp"
#include "acpit/grid.hpp"
#include "acpit/physics.hpp"
#include "oracles.hpp"

using namespace acpit;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("acpit_test_" + name);
}

}  // namespace

TEST(Grid, RejectsInvalidShapes) {
  EXPECT_THROW(Grid::make(1, 8, 1.0), ConfigError);
  EXPECT_THROW(Grid::make(4, 8, 1.0), ConfigError);
  EXPECT_THROW(Grid::make(2, 3, 1.0), ConfigError);
  EXPECT_THROW(Grid::make(2, 8, 0.0), ConfigError);
}

TEST(Grid, SpacingAndSymbolBasics) {
  const auto g = Grid::make(2, 4, 1.0);
  EXPECT_EQ(g->h(), 0.25);
  EXPECT_EQ(g->size(), 16u);
  ASSERT_EQ(g->symbol().size(), 16u);
  EXPECT_EQ(g->symbol()[0], 0.0);
  // mode (2, 0): (2 cos(pi) - 2) / h^2
  EXPECT_NEAR(g->symbol()[2], -64.0, 1e-12);
  for (double v : g->symbol()) EXPECT_LE(v, 0.0);
}

TEST(Grid, SymbolMatchesDenseEigenvalues) {
  for (int dim : {2, 3}) {
    const int n = dim == 2 ? 8 : 4;
    const auto g = Grid::make(dim, n, 1.0);
    const Eigen::MatrixXd a = oracle::stencil_matrix(dim, n, g->h());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    std::vector<double> ours(g->symbol().begin(), g->symbol().end());
    std::sort(ours.begin(), ours.end());
    std::vector<double> ref = oracle::to_std(es.eigenvalues());
    std::sort(ref.begin(), ref.end());
    double dev = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) dev = std::max(dev, std::abs(ours[i] - ref[i]));
    EXPECT_LT(dev, 1e-10) << "dim " << dim;
  }
}

TEST(Laplacian, ConstantIsAnnihilated) {
  const auto g = Grid::make(3, 6, 1.0);
  const Field u(g, 3.7);
  EXPECT_LT(laplacian(u).max_abs(), 1e-12);
}

TEST(Laplacian, SineIsEigenfunction) {
  const int n = 32;
  const auto g = Grid::make(2, n, 1.0);
  Field u(g);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) u[i + n * j] = std::sin(2.0 * std::numbers::pi * g->coord(i) / g->length());
  }
  const double lambda = (2.0 * std::cos(2.0 * std::numbers::pi / n) - 2.0) / (g->h() * g->h());
  const Field lu = laplacian(u);
  for (std::size_t p = 0; p < u.size(); ++p) {
    if (std::abs(u[p]) < 1e-3) continue;
    EXPECT_NEAR(lu[p] / (lambda * u[p]), 1.0, 1e-12);
  }
}

TEST(Laplacian, MatchesDenseMatrixProduct) {
  for (int dim : {2, 3}) {
    const auto g = Grid::make(dim, 8, 1.3);
    const Field u = ic_random(g, 1.0, 11);
    const Eigen::VectorXd ref = oracle::stencil_matrix(dim, 8, g->h()) * oracle::to_vec(u.values());
    const Field lu = laplacian(u);
    EXPECT_LT((oracle::to_vec(lu.values()) - ref).cwiseAbs().maxCoeff(), 1e-12 * ref.cwiseAbs().maxCoeff());
  }
}

TEST(Laplacian, IsLinearAndSumsToZero) {
  const auto g = Grid::make(2, 16, 1.0);
  const Field u = ic_random(g, 1.0, 1);
  const Field v = ic_random(g, 1.0, 2);
  const double a = 0.7, b = -1.3;
  Field w(g);
  for (std::size_t p = 0; p < w.size(); ++p) w[p] = a * u[p] + b * v[p];
  const Field lu = laplacian(u), lv = laplacian(v), lw = laplacian(w);
  const double scale = lw.max_abs();
  for (std::size_t p = 0; p < w.size(); ++p) EXPECT_NEAR(lw[p], a * lu[p] + b * lv[p], 1e-12 * scale);
  const double bound = 1e-9 * static_cast<double>(g->size()) * u.max_abs() / (g->h() * g->h());
  EXPECT_LT(std::abs(lu.sum()), bound);
}

TEST(Helmholtz, TrivialCases) {
  const auto g = Grid::make(2, 8, 1.0);
  const Field c(g, -0.4);
  const Field uc = helmholtz_solve(c, 0.3);
  for (std::size_t p = 0; p < uc.size(); ++p) EXPECT_NEAR(uc[p], -0.4, 1e-14);
  const Field r = ic_random(g, 1.0, 5);
  EXPECT_EQ(helmholtz_solve(r, 0.0).values(), r.values());
  EXPECT_THROW(helmholtz_solve(r, -1e-3), DomainError);
}

TEST(Helmholtz, MatchesDenseSolveOnAllSmallGrids) {
  for (int dim : {2, 3}) {
    for (int n = 4; n <= 8; ++n) {
      const auto g = Grid::make(dim, n, 1.0);
      const Field rhs = ic_random(g, 1.0, 100 + n);
      const double alpha = 0.01;
      const Eigen::MatrixXd a = oracle::stencil_matrix(dim, n, g->h());
      const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(a.rows(), a.cols()) - alpha * a;
      const std::vector<double> ref = oracle::to_std(m.partialPivLu().solve(oracle::to_vec(rhs.values())));
      EXPECT_LT(oracle::rel_l2(helmholtz_solve(rhs, alpha).values(), ref), 1e-11) << "dim " << dim << " n " << n;
    }
  }
}

TEST(Helmholtz, InvertsOperator) {
  const auto g = Grid::make(3, 16, 1.0);
  const Field u = ic_random(g, 1.0, 9);
  const double alpha = 2e-4;
  const Field lu = laplacian(u);
  Field rhs(g);
  for (std::size_t p = 0; p < u.size(); ++p) rhs[p] = u[p] - alpha * lu[p];
  EXPECT_LT(oracle::rel_l2(helmholtz_solve(rhs, alpha).values(), u.values()), 1e-10);
}

TEST(FieldIo, RoundTripIsBitExact) {
  for (int dim : {2, 3}) {
    const auto g = Grid::make(dim, dim == 2 ? 16 : 8, 2.5);
    const Field u = ic_random(g, 0.9, 77);
    const auto path = temp_path("roundtrip" + std::to_string(dim) + ".acf");
    write_field(u, path);
    const Field v = read_field(path);
    EXPECT_EQ(v.grid().dim(), dim);
    EXPECT_EQ(v.grid().n(), g->n());
    EXPECT_EQ(v.grid().length(), 2.5);
    EXPECT_EQ(std::memcmp(u.values().data(), v.values().data(), u.size() * sizeof(double)), 0);
    std::filesystem::remove(path);
  }
}

TEST(FieldIo, RejectsBadFiles) {
  const auto g = Grid::make(2, 4, 1.0);
  const auto path = temp_path("bad.acf");
  write_field(Field(g, 1.0), path);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.write("XXXX", 4);
  }
  EXPECT_THROW(read_field(path), FormatError);
  write_field(Field(g, 1.0), path);
  {
    std::ofstream f(path, std::ios::binary | std::ios::app);
    const double extra = 0.0;
    f.write(reinterpret_cast<const char*>(&extra), sizeof extra);
  }
  EXPECT_THROW(read_field(path), FormatError);
  std::filesystem::remove(path);
  EXPECT_THROW(read_field(temp_path("does_not_exist.acf")), IoError);
}

TEST(Field, CyclicShiftWraps) {
  const auto g = Grid::make(2, 4, 1.0);
  Field u(g);
  for (std::size_t p = 0; p < u.size(); ++p) u[p] = static_cast<double>(p);
  const Field s = cyclic_shift(u, {1, 0, 0});
  // value at x = 0 moves to x = 1
  EXPECT_EQ(s[1], u[0]);
  EXPECT_EQ(s[0], u[3]);
}
