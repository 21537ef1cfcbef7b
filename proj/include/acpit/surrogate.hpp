// Copyright (c) 2026, acpit developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "acpit/fine_solver.hpp"
#include "acpit/grid.hpp"
#include "acpit/physics.hpp"

namespace acpit {

/// Architecture of the convolutional coarse propagator.
///
///   h0 = tanh(conv_in(u))                          1 -> C channels
///   block b:  s_b = h_{b} + conv2(tanh(conv1(h_b)))
///             h_{b+1} = tanh(s_b), except the last block where h = s
///   y = conv_out(h_last)                           C -> 1 channel
///   y += (sum(u) - sum(y)) / N^dim                 mass-conservative only
///   out = clamp(y, bounds)
///
/// Every convolution is a stride-1 cross-correlation with circular padding.
struct ArchSpec {
  int dim = 2;
  int channels = 4;
  int res_blocks = 2;
  int kernel = 3;
  ModelKind kind = ModelKind::Classic;
  Bounds bounds = mbp_bounds(ModelKind::Classic);

  static ArchSpec defaults(int dim, ModelKind kind);
  void validate() const;
  int conv_layers() const { return 2 + 2 * res_blocks; }
  int kernel_volume() const;
  bool operator==(const ArchSpec& other) const;
};

struct Tensor {
  std::string name;
  std::vector<int> shape;
  std::vector<double> data;
};

/// Trainable weights. Tensors come in (weight, bias) pairs per convolution:
/// input, block<b>.conv1, block<b>.conv2 for each block, output. Weight shape
/// is [out, in, k, k(, k)] with the x offset fastest.
class ModelParams {
 public:
  ModelParams() = default;
  /// Zero-initialized parameters with the shapes implied by `arch`.
  explicit ModelParams(const ArchSpec& arch);

  const ArchSpec& arch() const { return arch_; }
  std::vector<Tensor>& tensors() { return tensors_; }
  const std::vector<Tensor>& tensors() const { return tensors_; }

  Tensor& weight(int layer) { return tensors_[2 * layer]; }
  const Tensor& weight(int layer) const { return tensors_[2 * layer]; }
  Tensor& bias(int layer) { return tensors_[2 * layer + 1]; }
  const Tensor& bias(int layer) const { return tensors_[2 * layer + 1]; }
  int in_channels(int layer) const;
  int out_channels(int layer) const;

  std::size_t parameter_count() const;
  bool all_finite() const;
  void set_zero();

  /// Centered uniform draw with half-width 1/sqrt(fan_in) for every tensor.
  static ModelParams initialize(const ArchSpec& arch, std::uint64_t seed);

 private:
  ArchSpec arch_;
  std::vector<Tensor> tensors_;
};

std::size_t parameter_count(int dim, int channels, int res_blocks, int kernel);

/// Circular cross-correlation over `n`-point periodic axes.
/// `input` holds in_ch stacked fields, `output` out_ch stacked fields, weights
/// are [out][in][kernel^dim] and bias [out].
void conv_circular(int dim, int n, int kernel, int in_ch, int out_ch, std::span<const double> input,
                   std::span<const double> weights, std::span<const double> bias, std::span<double> output);

Field mass_correction(const Field& u, double target_grid_sum);
Field bound_limiter(const Field& u, Bounds bounds);

/// Forward/backward evaluation with reusable activation buffers. One per
/// thread; the parameters must outlive the evaluator.
class SurrogateEvaluator {
 public:
  SurrogateEvaluator(const ModelParams& params, int n);

  /// Writes G(in) into `out` (may alias `in`).
  void forward(std::span<const double> in, std::span<double> out);
  /// Gradient of sum(grad_out * G(in)) with respect to every parameter,
  /// accumulated into `grads`. Recomputes the forward pass for `in`.
  void backward(std::span<const double> in, std::span<const double> grad_out, ModelParams& grads);

  int n() const { return n_; }
  std::size_t points() const { return points_; }

 private:
  void run_forward(std::span<const double> in);

  const ModelParams& params_;
  int n_;
  std::size_t points_;
  // Cached activations of the last forward pass.
  std::vector<double> h0_;
  std::vector<std::vector<double>> block_hidden_;
  std::vector<std::vector<double>> block_out_;
  std::vector<double> pre_limit_;
  std::vector<double> scratch_a_;
  std::vector<double> scratch_b_;
  std::vector<double> scratch_c_;
};

Field forward(const ModelParams& params, const Field& u);

/// Mean over batch and grid of the squared Crank-Nicolson residual
///   r = U1 - U0 - dt/2 (eps^2 L (U1 + U0) + f(U1) + f(U0) - g(U1) - g(U0)).
double scheme_loss(std::span<const Field> u_n, std::span<const Field> u_next, const StepperConfig& cfg);

struct LossAndGrad {
  double loss = 0.0;
  ModelParams grads;
};

/// Scheme loss of the network prediction U1 = G(U0) and its exact gradient
/// with respect to every parameter.
LossAndGrad loss_and_grad(const ModelParams& params, std::span<const Field> batch_u_n, const StepperConfig& cfg);

/// Checkpoint: "ACNN", u32 version, u32 dim, u32 channels, u32 res_blocks,
/// u32 kernel, u8 kind, f64 bound_lo, f64 bound_hi, then per tensor
/// u32 name_len, name, u32 rank, u32 dims[rank], f64 data. Little-endian.
void save_checkpoint(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_checkpoint(const std::filesystem::path& path);
/// Throws StructuralError unless the stored architecture equals `expected`.
ModelParams load_checkpoint(const std::filesystem::path& path, const ArchSpec& expected);

}  // namespace acpit
