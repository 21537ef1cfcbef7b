// Copyright (c) 2026, acpit developers
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <algorithm>
#include <filesystem>
#include <fstream>

#include "acpit/error.hpp"
#include "acpit/surrogate.hpp"
#include "oracles.hpp"

using namespace acpit;

namespace {

std::vector<double> random_vec(std::size_t count, std::uint64_t seed, double amp = 1.0) {
  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i) v[i] = random_value(seed, i, amp);
  return v;
}

StepperConfig stepper(ModelKind kind, double eps = 0.05) {
  StepperConfig cfg;
  cfg.physics = {kind, eps};
  return cfg;
}

// Reference forward pass following the documented wiring, built on the naive
// convolution oracle.
std::vector<double> reference_forward(const ModelParams& p, const std::vector<double>& u, int n) {
  const ArchSpec& a = p.arch();
  auto conv = [&](int layer, const std::vector<double>& in) {
    return oracle::naive_conv(a.dim, n, a.kernel, p.in_channels(layer), p.out_channels(layer), in, p.weight(layer).data,
                              p.bias(layer).data);
  };
  auto tanh_all = [](std::vector<double> v) {
    for (double& x : v) x = std::tanh(x);
    return v;
  };
  std::vector<double> h = tanh_all(conv(0, u));
  for (int b = 0; b < a.res_blocks; ++b) {
    const std::vector<double> inner = conv(2 + 2 * b, tanh_all(conv(1 + 2 * b, h)));
    for (std::size_t i = 0; i < h.size(); ++i) h[i] += inner[i];
    if (b + 1 < a.res_blocks) h = tanh_all(h);
  }
  std::vector<double> y = conv(1 + 2 * a.res_blocks, h);
  if (a.kind == ModelKind::MassConservative) {
    double su = 0.0, sy = 0.0;
    for (double v : u) su += v;
    for (double v : y) sy += v;
    for (double& v : y) v += (su - sy) / static_cast<double>(y.size());
  }
  for (double& v : y) v = std::clamp(v, a.bounds.lo, a.bounds.hi);
  return y;
}

}  // namespace

TEST(Conv, DeltaKernelIsIdentity) {
  const int n = 6;
  std::vector<double> w(9, 0.0);
  w[4] = 1.0;
  const auto in = random_vec(n * n, 1);
  std::vector<double> out(n * n);
  conv_circular(2, n, 3, 1, 1, in, w, std::vector<double>{0.0}, out);
  EXPECT_EQ(out, in);
}

TEST(Conv, OnesKernelOnConstant) {
  const int n = 5;
  const std::vector<double> w(9, 1.0), in(n * n, 0.3);
  std::vector<double> out(n * n);
  conv_circular(2, n, 3, 1, 1, in, w, std::vector<double>{0.0}, out);
  for (double v : out) EXPECT_NEAR(v, 2.7, 1e-15);
}

TEST(Conv, MatchesNaiveOracle) {
  struct Case {
    int dim, n, kernel, in_ch, out_ch;
  };
  for (const Case& c : {Case{2, 5, 3, 4, 3}, Case{2, 8, 5, 2, 2}, Case{3, 5, 3, 2, 3}}) {
    const int pts = c.dim == 2 ? c.n * c.n : c.n * c.n * c.n;
    const int kv = c.dim == 2 ? c.kernel * c.kernel : c.kernel * c.kernel * c.kernel;
    const auto in = random_vec(static_cast<std::size_t>(c.in_ch) * pts, 2);
    const auto w = random_vec(static_cast<std::size_t>(c.in_ch) * c.out_ch * kv, 3);
    const auto b = random_vec(c.out_ch, 4);
    std::vector<double> out(static_cast<std::size_t>(c.out_ch) * pts);
    conv_circular(c.dim, c.n, c.kernel, c.in_ch, c.out_ch, in, w, b, out);
    const auto ref = oracle::naive_conv(c.dim, c.n, c.kernel, c.in_ch, c.out_ch, in, w, b);
    for (std::size_t i = 0; i < out.size(); ++i) EXPECT_NEAR(out[i], ref[i], 1e-13);
  }
}

TEST(Conv, ShapeMismatchIsStructural) {
  std::vector<double> in(10), w(9), b(1), out(16);
  EXPECT_THROW(conv_circular(2, 4, 3, 1, 1, in, w, b, out), StructuralError);
}

TEST(Model, ParameterCountAndShapes) {
  const ArchSpec a = ArchSpec::defaults(2, ModelKind::Classic);
  const ModelParams p(a);
  // (1*4*9 + 4) + 4 * (4*4*9 + 4) + (4*9 + 1)
  EXPECT_EQ(p.parameter_count(), 40u + 4u * 148u + 37u);
  EXPECT_EQ(parameter_count(2, 4, 2, 3), p.parameter_count());
  EXPECT_EQ(parameter_count(3, 4, 2, 3), 112u + 4u * 436u + 109u);
  EXPECT_EQ(p.weight(0).name, "input.weight");
  EXPECT_EQ(p.weight(5).name, "output.weight");
  EXPECT_EQ(p.weight(3).shape, (std::vector<int>{4, 4, 3, 3}));
}

TEST(Model, ForwardMatchesDocumentedWiring) {
  for (ModelKind kind : {ModelKind::Classic, ModelKind::MassConservative}) {
    for (int blocks : {1, 2, 3}) {
      ArchSpec a = ArchSpec::defaults(2, kind);
      a.res_blocks = blocks;
      const ModelParams p = ModelParams::initialize(a, 17);
      const auto g = Grid::make(2, 8, 1.0);
      const Field u = ic_random(g, 0.9, 5);
      const auto ref = reference_forward(p, u.values(), 8);
      const Field out = forward(p, u);
      for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(out[i], ref[i], 1e-13);
    }
  }
}

TEST(Model, ZeroNetwork) {
  const auto g = Grid::make(2, 16, 1.0);
  const Field u = ic_random(g, 0.5, 8);
  const Field classic = forward(ModelParams(ArchSpec::defaults(2, ModelKind::Classic)), u);
  EXPECT_EQ(classic.max_abs(), 0.0);
  const Field mass = forward(ModelParams(ArchSpec::defaults(2, ModelKind::MassConservative)), u);
  const double c = u.sum() / static_cast<double>(u.size());
  for (double v : mass.values()) EXPECT_NEAR(v, c, 1e-15);
  EXPECT_NEAR(mass.sum(), u.sum(), 1e-13);
}

TEST(Model, OutputStagesAndBounds) {
  const auto g = Grid::make(2, 8, 1.0);
  const Field u = ic_random(g, 0.9, 9);
  EXPECT_EQ(mass_correction(u, u.sum()).values(), u.values());
  const Field z = mass_correction(Field(g), 6.4);
  for (double v : z.values()) EXPECT_DOUBLE_EQ(v, 0.1);
  const Field corrected = mass_correction(u, 3.0);
  EXPECT_NEAR(corrected.sum(), 3.0, 1e-10 * 3.0);

  const Bounds mb = mbp_bounds(ModelKind::MassConservative);
  EXPECT_EQ(bound_limiter(u, {-1.0, 1.0}).values(), u.values());
  EXPECT_EQ(bound_limiter(Field(g, 2.0), {-1.0, 1.0})[0], 1.0);
  EXPECT_EQ(bound_limiter(Field(g, -5.0), mb)[0], -2.0 * std::sqrt(3.0) / 3.0);

  for (ModelKind kind : {ModelKind::Classic, ModelKind::MassConservative}) {
    ArchSpec a = ArchSpec::defaults(2, kind);
    ModelParams p = ModelParams::initialize(a, 3);
    for (auto& t : p.tensors()) {
      for (double& v : t.data) v *= 8.0;  // drive outputs into the limiter
    }
    const Field out = forward(p, u);
    for (double v : out.values()) {
      EXPECT_GE(v, a.bounds.lo - 1e-15);
      EXPECT_LE(v, a.bounds.hi + 1e-15);
    }
  }
}

TEST(Model, MassConservedWithoutClamping) {
  ArchSpec a = ArchSpec::defaults(2, ModelKind::MassConservative);
  ModelParams p = ModelParams::initialize(a, 12);
  for (auto& t : p.tensors()) {
    for (double& v : t.data) v *= 0.2;
  }
  const auto g = Grid::make(2, 16, 1.0);
  const Field u = ic_random(g, 0.5, 10);
  SurrogateEvaluator eval(p, 16);
  Field out(g);
  eval.forward(u.data(), out.data());
  ASSERT_LT(out.max_abs(), a.bounds.hi);  // limiter inactive
  EXPECT_NEAR(out.sum(), u.sum(), 1e-10 * std::max(1.0, std::abs(u.sum())));
}

TEST(Model, TranslationEquivariantAndFullyConvolutional) {
  for (int dim : {2, 3}) {
    const ModelParams p = ModelParams::initialize(ArchSpec::defaults(dim, ModelKind::Classic), 21);
    const auto g = Grid::make(dim, dim == 2 ? 16 : 8, 1.0);
    const Field u = ic_random(g, 0.9, 11);
    const std::array<int, 3> off{3, -2, 1};
    const Field a = forward(p, cyclic_shift(u, off));
    const Field b = cyclic_shift(forward(p, u), off);
    EXPECT_LT(sup_diff(a.data(), b.data()), 1e-10);
  }
  const ModelParams p = ModelParams::initialize(ArchSpec::defaults(2, ModelKind::Classic), 1);
  for (int n : {32, 64, 128}) EXPECT_EQ(forward(p, ic_random(Grid::make(2, n, 1.0), 0.9, 1)).size(), size_t(n * n));
}

TEST(Loss, CnStepZeroesResidual) {
  const auto g = Grid::make(2, 16, 1.0);
  for (ModelKind kind : {ModelKind::Classic, ModelKind::MassConservative}) {
    const auto cfg = stepper(kind, 0.01);
    std::vector<Field> u0{ic_random(g, 0.9, 1), ic_random(g, 0.9, 2)};
    std::vector<Field> u1{cn_step(u0[0], cfg), cn_step(u0[1], cfg)};
    EXPECT_LT(scheme_loss(u0, u1, cfg), 1e-18);
  }
  const auto cfg = stepper(ModelKind::Classic);
  std::vector<Field> one{Field(g, 1.0)};
  EXPECT_EQ(scheme_loss(one, one, cfg), 0.0);
}

// Every parameter tensor against central differences of the loss.
TEST(Loss, GradientMatchesFiniteDifferences) {
  const auto g = Grid::make(2, 8, 1.0);
  for (ModelKind kind : {ModelKind::Classic, ModelKind::MassConservative}) {
    const auto cfg = stepper(kind, 0.05);
    const ModelParams params = ModelParams::initialize(ArchSpec::defaults(2, kind), 5);
    const std::vector<Field> batch{ic_random(g, 0.5, 30), ic_random(g, 0.5, 31)};
    const LossAndGrad lg = loss_and_grad(params, batch, cfg);
    auto loss_at = [&](const ModelParams& p) {
      std::vector<Field> next;
      for (const Field& u : batch) next.push_back(forward(p, u));
      return scheme_loss(batch, next, cfg);
    };
    EXPECT_NEAR(lg.loss, loss_at(params), 1e-15);
    const double step = 1e-6;
    std::vector<double> num(params.tensors().size(), 0.0), den(params.tensors().size(), 0.0);
    double total = 0.0;
    for (std::size_t t = 0; t < params.tensors().size(); ++t) {
      for (std::size_t i = 0; i < params.tensors()[t].data.size(); ++i) {
        ModelParams plus = params, minus = params;
        plus.tensors()[t].data[i] += step;
        minus.tensors()[t].data[i] -= step;
        const double fd = (loss_at(plus) - loss_at(minus)) / (2.0 * step);
        const double an = lg.grads.tensors()[t].data[i];
        num[t] += (fd - an) * (fd - an);
        den[t] += fd * fd;
      }
      total += den[t];
    }
    // Under mass correction a uniform output shift has no effect, so biases
    // that only shift the output uniformly have an exactly zero gradient; the
    // relative error of those tensors is measured against a floor tied to the
    // overall gradient size instead of their own (rounding-noise) norm.
    for (std::size_t t = 0; t < params.tensors().size(); ++t) {
      const double scale = std::max(den[t], 1e-8 * total);
      EXPECT_LT(std::sqrt(num[t] / scale), 1e-5) << params.tensors()[t].name << " kind " << to_string(kind);
    }
  }
}

TEST(Checkpoint, RoundTripAndErrors) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto path = dir / "acpit_test_model.acnn";
  const ModelParams p = ModelParams::initialize(ArchSpec::defaults(3, ModelKind::MassConservative), 4);
  save_checkpoint(p, path);
  const ModelParams q = load_checkpoint(path);
  EXPECT_TRUE(q.arch() == p.arch());
  EXPECT_EQ(q.arch().kind, ModelKind::MassConservative);
  EXPECT_EQ(q.arch().bounds.hi, mbp_bounds(ModelKind::MassConservative).hi);
  for (std::size_t t = 0; t < p.tensors().size(); ++t) EXPECT_EQ(q.tensors()[t].data, p.tensors()[t].data);
  EXPECT_THROW(load_checkpoint(path, ArchSpec::defaults(3, ModelKind::Classic)), StructuralError);
  ArchSpec wide = ArchSpec::defaults(3, ModelKind::MassConservative);
  wide.channels = 8;
  EXPECT_THROW(load_checkpoint(path, wide), StructuralError);
  {
    std::ofstream os(path, std::ios::binary);
    os << "NOPE";
  }
  EXPECT_THROW(load_checkpoint(path), FormatError);
  std::filesystem::remove(path);
}
