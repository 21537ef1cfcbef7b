// Copyright (c) 2026, acpit developers
// SPDX-License-Identifier: Apache-2.0

#include "acpit/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "acpit/error.hpp"
#include "binary_io.hpp"

namespace acpit {
namespace {

constexpr char kCheckpointMagic[4] = {'A', 'C', 'N', 'N'};
constexpr std::uint32_t kCheckpointVersion = 1;

int ipow(int base, int e) {
  int r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

// dst[x] += w * src[(x + dx) mod n]
inline void line_axpy(double* dst, const double* src, int n, int dx, double w) {
  if (dx >= 0) {
    const int split = n - dx;
    for (int x = 0; x < split; ++x) dst[x] += w * src[x + dx];
    for (int x = split; x < n; ++x) dst[x] += w * src[x + dx - n];
  } else {
    const int split = -dx;
    for (int x = 0; x < split; ++x) dst[x] += w * src[x + dx + n];
    for (int x = split; x < n; ++x) dst[x] += w * src[x + dx];
  }
}

// sum_x a[x] * src[(x + dx) mod n]
inline double line_dot(const double* a, const double* src, int n, int dx) {
  double s = 0.0;
  if (dx >= 0) {
    const int split = n - dx;
    for (int x = 0; x < split; ++x) s += a[x] * src[x + dx];
    for (int x = split; x < n; ++x) s += a[x] * src[x + dx - n];
  } else {
    const int split = -dx;
    for (int x = 0; x < split; ++x) s += a[x] * src[x + dx + n];
    for (int x = split; x < n; ++x) s += a[x] * src[x + dx];
  }
  return s;
}

inline int wrap(int i, int n) { return ((i % n) + n) % n; }

// Calls fn(dst_line, src_line) for every x-line, where the source line is the
// destination line shifted by (dy, dz).
template <typename Fn>
void for_each_line(int dim, int n, int dy, int dz, Fn&& fn) {
  const std::size_t nn = static_cast<std::size_t>(n);
  const int nz = dim == 3 ? n : 1;
  for (int z = 0; z < nz; ++z) {
    const int sz = dim == 3 ? wrap(z + dz, n) : 0;
    for (int y = 0; y < n; ++y) {
      const int sy = wrap(y + dy, n);
      fn((static_cast<std::size_t>(z) * nn + y) * nn, (static_cast<std::size_t>(sz) * nn + sy) * nn);
    }
  }
}

struct Offset {
  int dx, dy, dz;
  int index;
};

std::vector<Offset> kernel_offsets(int dim, int kernel) {
  const int r = kernel / 2;
  const int kz = dim == 3 ? kernel : 1;
  std::vector<Offset> offs;
  for (int c = 0; c < kz; ++c) {
    for (int b = 0; b < kernel; ++b) {
      for (int a = 0; a < kernel; ++a) {
        offs.push_back({a - r, b - r, dim == 3 ? c - r : 0, (c * kernel + b) * kernel + a});
      }
    }
  }
  return offs;
}

// Gradient of a circular convolution: accumulates into grad_weights,
// grad_bias and (when non-empty) grad_input.
void conv_circular_backward(int dim, int n, int kernel, int in_ch, int out_ch, std::span<const double> input,
                            std::span<const double> weights, std::span<const double> grad_output,
                            std::span<double> grad_weights, std::span<double> grad_bias,
                            std::span<double> grad_input) {
  const std::size_t pts = static_cast<std::size_t>(ipow(n, dim));
  const int kvol = ipow(kernel, dim);
  const auto offs = kernel_offsets(dim, kernel);
  for (int o = 0; o < out_ch; ++o) {
    const double* go = grad_output.data() + o * pts;
    double bsum = 0.0;
    for (std::size_t p = 0; p < pts; ++p) bsum += go[p];
    grad_bias[o] += bsum;
    for (int i = 0; i < in_ch; ++i) {
      const double* in = input.data() + i * pts;
      for (const Offset& off : offs) {
        double s = 0.0;
        for_each_line(dim, n, off.dy, off.dz, [&](std::size_t dst, std::size_t src) {
          s += line_dot(go + dst, in + src, n, off.dx);
        });
        grad_weights[(static_cast<std::size_t>(o) * in_ch + i) * kvol + off.index] += s;
      }
    }
  }
  if (grad_input.empty()) return;
  for (int i = 0; i < in_ch; ++i) {
    double* gi = grad_input.data() + i * pts;
    for (int o = 0; o < out_ch; ++o) {
      const double* go = grad_output.data() + o * pts;
      for (const Offset& off : offs) {
        const double w = weights[(static_cast<std::size_t>(o) * in_ch + i) * kvol + off.index];
        for_each_line(dim, n, -off.dy, -off.dz, [&](std::size_t dst, std::size_t src) {
          line_axpy(gi + dst, go + src, n, -off.dx, w);
        });
      }
    }
  }
}

void check_finite_params(const ModelParams& params) {
  if (!params.all_finite()) throw StructuralError("model parameters contain non-finite values");
}

}  // namespace

ArchSpec ArchSpec::defaults(int dim, ModelKind kind) {
  ArchSpec a;
  a.dim = dim;
  a.kind = kind;
  a.bounds = mbp_bounds(kind);
  return a;
}

void ArchSpec::validate() const {
  if (dim != 2 && dim != 3) throw StructuralError("architecture dim must be 2 or 3");
  if (channels < 1) throw StructuralError("architecture channels must be >= 1");
  if (res_blocks < 0) throw StructuralError("architecture res_blocks must be >= 0");
  if (kernel < 1 || kernel % 2 == 0) throw StructuralError("architecture kernel must be odd");
  const Bounds expected = mbp_bounds(kind);
  if (bounds.lo != expected.lo || bounds.hi != expected.hi) {
    throw StructuralError("architecture bounds do not match the model kind");
  }
}

int ArchSpec::kernel_volume() const { return ipow(kernel, dim); }

bool ArchSpec::operator==(const ArchSpec& o) const {
  return dim == o.dim && channels == o.channels && res_blocks == o.res_blocks && kernel == o.kernel &&
         kind == o.kind && bounds.lo == o.bounds.lo && bounds.hi == o.bounds.hi;
}

ModelParams::ModelParams(const ArchSpec& arch) : arch_(arch) {
  arch_.validate();
  const int kvol = arch_.kernel_volume();
  auto add_conv = [&](const std::string& name, int in_ch, int out_ch) {
    std::vector<int> wshape{out_ch, in_ch};
    for (int a = 0; a < arch_.dim; ++a) wshape.push_back(arch_.kernel);
    tensors_.push_back({name + ".weight", wshape, std::vector<double>(static_cast<std::size_t>(out_ch) * in_ch * kvol)});
    tensors_.push_back({name + ".bias", {out_ch}, std::vector<double>(out_ch)});
  };
  add_conv("input", 1, arch_.channels);
  for (int b = 0; b < arch_.res_blocks; ++b) {
    add_conv("block" + std::to_string(b) + ".conv1", arch_.channels, arch_.channels);
    add_conv("block" + std::to_string(b) + ".conv2", arch_.channels, arch_.channels);
  }
  add_conv("output", arch_.channels, 1);
}

int ModelParams::in_channels(int layer) const { return weight(layer).shape[1]; }
int ModelParams::out_channels(int layer) const { return weight(layer).shape[0]; }

std::size_t ModelParams::parameter_count() const {
  std::size_t count = 0;
  for (const auto& t : tensors_) count += t.data.size();
  return count;
}

bool ModelParams::all_finite() const {
  for (const auto& t : tensors_) {
    for (double v : t.data) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

void ModelParams::set_zero() {
  for (auto& t : tensors_) std::fill(t.data.begin(), t.data.end(), 0.0);
}

ModelParams ModelParams::initialize(const ArchSpec& arch, std::uint64_t seed) {
  ModelParams params(arch);
  const int kvol = arch.kernel_volume();
  std::uint64_t counter = 0;
  for (int layer = 0; layer < arch.conv_layers(); ++layer) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(params.in_channels(layer) * kvol));
    for (double& w : params.weight(layer).data) w = random_value(seed, counter++, scale);
    for (double& b : params.bias(layer).data) b = random_value(seed, counter++, scale);
  }
  return params;
}

std::size_t parameter_count(int dim, int channels, int res_blocks, int kernel) {
  const std::size_t kvol = static_cast<std::size_t>(ipow(kernel, dim));
  const std::size_t c = static_cast<std::size_t>(channels);
  return (c * kvol + c) + 2 * static_cast<std::size_t>(res_blocks) * (c * c * kvol + c) + (c * kvol + 1);
}

void conv_circular(int dim, int n, int kernel, int in_ch, int out_ch, std::span<const double> input,
                   std::span<const double> weights, std::span<const double> bias, std::span<double> output) {
  if (kernel % 2 == 0) throw StructuralError("conv_circular: kernel must be odd");
  if (kernel > n) throw StructuralError("conv_circular: kernel larger than grid");
  const std::size_t pts = static_cast<std::size_t>(ipow(n, dim));
  const int kvol = ipow(kernel, dim);
  if (input.size() != pts * in_ch || output.size() != pts * out_ch ||
      weights.size() != static_cast<std::size_t>(out_ch) * in_ch * kvol || bias.size() != static_cast<std::size_t>(out_ch)) {
    throw StructuralError("conv_circular: shape mismatch");
  }
  const auto offs = kernel_offsets(dim, kernel);
  for (int o = 0; o < out_ch; ++o) {
    double* out = output.data() + o * pts;
    std::fill(out, out + pts, bias[o]);
    for (int i = 0; i < in_ch; ++i) {
      const double* in = input.data() + i * pts;
      for (const Offset& off : offs) {
        const double w = weights[(static_cast<std::size_t>(o) * in_ch + i) * kvol + off.index];
        for_each_line(dim, n, off.dy, off.dz, [&](std::size_t dst, std::size_t src) {
          line_axpy(out + dst, in + src, n, off.dx, w);
        });
      }
    }
  }
}

Field mass_correction(const Field& u, double target_grid_sum) {
  Field out = u;
  const double shift = (target_grid_sum - u.sum()) / static_cast<double>(u.size());
  for (double& v : out.data()) v += shift;
  return out;
}

Field bound_limiter(const Field& u, Bounds bounds) {
  if (!(bounds.lo < bounds.hi)) throw DomainError("bound_limiter requires lo < hi");
  Field out = u;
  for (double& v : out.data()) v = std::clamp(v, bounds.lo, bounds.hi);
  return out;
}

SurrogateEvaluator::SurrogateEvaluator(const ModelParams& params, int n)
    : params_(params), n_(n), points_(static_cast<std::size_t>(ipow(n, params.arch().dim))) {
  const ArchSpec& arch = params_.arch();
  if (arch.kernel > n) throw StructuralError("grid smaller than the convolution kernel");
  const std::size_t hidden = points_ * arch.channels;
  h0_.resize(hidden);
  block_hidden_.assign(arch.res_blocks, std::vector<double>(hidden));
  block_out_.assign(arch.res_blocks, std::vector<double>(hidden));
  pre_limit_.resize(points_);
  scratch_a_.resize(hidden);
  scratch_b_.resize(hidden);
  scratch_c_.resize(hidden);
}

void SurrogateEvaluator::run_forward(std::span<const double> in) {
  check_finite_params(params_);
  const ArchSpec& arch = params_.arch();
  const int dim = arch.dim;
  const int k = arch.kernel;
  const int c = arch.channels;

  conv_circular(dim, n_, k, 1, c, in, params_.weight(0).data, params_.bias(0).data, h0_);
  for (double& v : h0_) v = std::tanh(v);

  const std::vector<double>* current = &h0_;
  for (int b = 0; b < arch.res_blocks; ++b) {
    const int l1 = 1 + 2 * b;
    const int l2 = 2 + 2 * b;
    auto& hidden = block_hidden_[b];
    auto& out = block_out_[b];
    conv_circular(dim, n_, k, c, c, *current, params_.weight(l1).data, params_.bias(l1).data, hidden);
    for (double& v : hidden) v = std::tanh(v);
    conv_circular(dim, n_, k, c, c, hidden, params_.weight(l2).data, params_.bias(l2).data, out);
    const bool last = b + 1 == arch.res_blocks;
    for (std::size_t p = 0; p < out.size(); ++p) {
      const double s = (*current)[p] + out[p];
      out[p] = last ? s : std::tanh(s);
    }
    current = &out;
  }
  const int lo = arch.conv_layers() - 1;
  conv_circular(dim, n_, k, c, 1, *current, params_.weight(lo).data, params_.bias(lo).data, pre_limit_);

  if (arch.kind == ModelKind::MassConservative) {
    double target = 0.0;
    double sum = 0.0;
    for (std::size_t p = 0; p < points_; ++p) {
      target += in[p];
      sum += pre_limit_[p];
    }
    const double shift = (target - sum) / static_cast<double>(points_);
    for (double& v : pre_limit_) v += shift;
  }
}

void SurrogateEvaluator::forward(std::span<const double> in, std::span<double> out) {
  if (in.size() != points_ || out.size() != points_) throw StructuralError("surrogate forward: size mismatch");
  run_forward(in);
  const Bounds bounds = params_.arch().bounds;
  for (std::size_t p = 0; p < points_; ++p) out[p] = std::clamp(pre_limit_[p], bounds.lo, bounds.hi);
}

void SurrogateEvaluator::backward(std::span<const double> in, std::span<const double> grad_out, ModelParams& grads) {
  if (in.size() != points_ || grad_out.size() != points_) throw StructuralError("surrogate backward: size mismatch");
  run_forward(in);
  const ArchSpec& arch = params_.arch();
  const int dim = arch.dim;
  const int k = arch.kernel;
  const int c = arch.channels;
  const Bounds bounds = arch.bounds;

  // Clamp: unit derivative inside the closed interval, zero outside.
  std::vector<double> dy(points_);
  for (std::size_t p = 0; p < points_; ++p) {
    const double v = pre_limit_[p];
    dy[p] = (v >= bounds.lo && v <= bounds.hi) ? grad_out[p] : 0.0;
  }
  if (arch.kind == ModelKind::MassConservative) {
    double mean = 0.0;
    for (double v : dy) mean += v;
    mean /= static_cast<double>(points_);
    for (double& v : dy) v -= mean;
  }

  const int lo = arch.conv_layers() - 1;
  const std::vector<double>& last_hidden = arch.res_blocks > 0 ? block_out_.back() : h0_;
  std::vector<double>& dh = scratch_a_;
  std::fill(dh.begin(), dh.end(), 0.0);
  conv_circular_backward(dim, n_, k, c, 1, last_hidden, params_.weight(lo).data, dy, grads.weight(lo).data,
                         grads.bias(lo).data, dh);

  std::vector<double>& dhidden = scratch_b_;
  std::vector<double>& dprev = scratch_c_;
  for (int b = arch.res_blocks - 1; b >= 0; --b) {
    const int l1 = 1 + 2 * b;
    const int l2 = 2 + 2 * b;
    const bool last = b + 1 == arch.res_blocks;
    const std::vector<double>& out = block_out_[b];
    const std::vector<double>& hidden = block_hidden_[b];
    const std::vector<double>& prev = b > 0 ? block_out_[b - 1] : h0_;
    if (!last) {
      for (std::size_t p = 0; p < dh.size(); ++p) dh[p] *= 1.0 - out[p] * out[p];
    }
    // dh now holds the gradient of the block sum; the skip path passes it through.
    std::fill(dhidden.begin(), dhidden.end(), 0.0);
    conv_circular_backward(dim, n_, k, c, c, hidden, params_.weight(l2).data, dh, grads.weight(l2).data,
                           grads.bias(l2).data, dhidden);
    for (std::size_t p = 0; p < dhidden.size(); ++p) dhidden[p] *= 1.0 - hidden[p] * hidden[p];
    std::copy(dh.begin(), dh.end(), dprev.begin());
    conv_circular_backward(dim, n_, k, c, c, prev, params_.weight(l1).data, dhidden, grads.weight(l1).data,
                           grads.bias(l1).data, dprev);
    dh.swap(dprev);
  }
  for (std::size_t p = 0; p < dh.size(); ++p) dh[p] *= 1.0 - h0_[p] * h0_[p];
  conv_circular_backward(dim, n_, k, 1, c, in, params_.weight(0).data, dh, grads.weight(0).data,
                         grads.bias(0).data, {});
}

Field forward(const ModelParams& params, const Field& u) {
  if (u.grid().dim() != params.arch().dim) throw StructuralError("surrogate forward: dimension mismatch");
  SurrogateEvaluator eval(params, u.grid().n());
  Field out(u.grid_ptr());
  eval.forward(u.data(), out.data());
  return out;
}

namespace {

// Residual r = U1 - U0 - dt/2 (eps^2 L (U1 + U0) + f(U1) + f(U0) - g(U1) - g(U0)).
void scheme_residual(const Grid& grid, std::span<const double> u0, std::span<const double> u1,
                     const StepperConfig& cfg, std::vector<double>& residual) {
  const std::size_t m = grid.size();
  std::vector<double> sum(m);
  for (std::size_t p = 0; p < m; ++p) sum[p] = u1[p] + u0[p];
  residual.resize(m);
  laplacian_into(grid, sum, residual);
  const double eps2 = cfg.physics.epsilon * cfg.physics.epsilon;
  const double half_dt = 0.5 * cfg.dt;
  const double g = nonlocal_g(u1, cfg.physics.kind) + nonlocal_g(u0, cfg.physics.kind);
  for (std::size_t p = 0; p < m; ++p) {
    residual[p] = u1[p] - u0[p] - half_dt * (eps2 * residual[p] + f_nonlinear(u1[p]) + f_nonlinear(u0[p]) - g);
  }
}

}  // namespace

double scheme_loss(std::span<const Field> u_n, std::span<const Field> u_next, const StepperConfig& cfg) {
  if (u_n.empty() || u_n.size() != u_next.size()) throw StructuralError("scheme_loss: batch size mismatch");
  double total = 0.0;
  std::size_t count = 0;
  std::vector<double> r;
  for (std::size_t b = 0; b < u_n.size(); ++b) {
    scheme_residual(u_n[b].grid(), u_n[b].data(), u_next[b].data(), cfg, r);
    for (double v : r) total += v * v;
    count += r.size();
  }
  return total / static_cast<double>(count);
}

LossAndGrad loss_and_grad(const ModelParams& params, std::span<const Field> batch_u_n, const StepperConfig& cfg) {
  if (batch_u_n.empty()) throw StructuralError("loss_and_grad: empty batch");
  const GridPtr& grid = batch_u_n.front().grid_ptr();
  const std::size_t m = grid->size();
  const double scale = 2.0 / static_cast<double>(m * batch_u_n.size());
  const double eps2 = cfg.physics.epsilon * cfg.physics.epsilon;
  const double half_dt = 0.5 * cfg.dt;
  const bool mass = cfg.physics.kind == ModelKind::MassConservative;

  LossAndGrad result{0.0, ModelParams(params.arch())};
  SurrogateEvaluator eval(params, grid->n());
  std::vector<double> u1(m), r, dr(m), lap_dr(m), du1(m);
  double total = 0.0;
  for (const Field& u0 : batch_u_n) {
    if (!u0.grid().same_shape(*grid)) throw StructuralError("loss_and_grad: batch grids differ");
    eval.forward(u0.data(), u1);
    scheme_residual(*grid, u0.data(), u1, cfg, r);
    double rsum = 0.0;
    for (std::size_t p = 0; p < m; ++p) {
      total += r[p] * r[p];
      dr[p] = scale * r[p];
      rsum += dr[p];
    }
    // dL/dU1 = dr - dt/2 (eps^2 L dr + f'(U1) dr - f'(U1) sum(dr)/M); L is symmetric.
    laplacian_into(*grid, dr, lap_dr);
    const double mean_dr = mass ? rsum / static_cast<double>(m) : 0.0;
    for (std::size_t p = 0; p < m; ++p) {
      du1[p] = dr[p] - half_dt * (eps2 * lap_dr[p] + f_prime(u1[p]) * (dr[p] - mean_dr));
    }
    eval.backward(u0.data(), du1, result.grads);
  }
  result.loss = total / static_cast<double>(m * batch_u_n.size());
  if (!std::isfinite(result.loss)) throw NumericalError("loss_and_grad: non-finite loss");
  return result;
}

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  const ArchSpec& a = params.arch();
  os.write(kCheckpointMagic, 4);
  detail::write_le<std::uint32_t>(os, kCheckpointVersion);
  detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(a.dim));
  detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(a.channels));
  detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(a.res_blocks));
  detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(a.kernel));
  detail::write_le<std::uint8_t>(os, static_cast<std::uint8_t>(a.kind));
  detail::write_le<double>(os, a.bounds.lo);
  detail::write_le<double>(os, a.bounds.hi);
  for (const Tensor& t : params.tensors()) {
    detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(t.name.size()));
    os.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(t.shape.size()));
    for (int d : t.shape) detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(d));
    detail::write_f64_block(os, t.data.data(), t.data.size());
  }
  if (!os) throw IoError("write failed for " + path.string());
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || !std::equal(magic, magic + 4, kCheckpointMagic)) {
    throw FormatError(path.string() + ": bad magic, not an ACNN checkpoint");
  }
  const auto version = detail::read_le<std::uint32_t>(is, "version");
  if (version != kCheckpointVersion) throw FormatError(path.string() + ": unsupported checkpoint version");
  ArchSpec arch;
  arch.dim = static_cast<int>(detail::read_le<std::uint32_t>(is, "dim"));
  arch.channels = static_cast<int>(detail::read_le<std::uint32_t>(is, "channels"));
  arch.res_blocks = static_cast<int>(detail::read_le<std::uint32_t>(is, "res_blocks"));
  arch.kernel = static_cast<int>(detail::read_le<std::uint32_t>(is, "kernel"));
  const auto kind = detail::read_le<std::uint8_t>(is, "kind");
  if (kind > 1) throw FormatError(path.string() + ": unknown model kind");
  arch.kind = static_cast<ModelKind>(kind);
  arch.bounds.lo = detail::read_le<double>(is, "bound_lo");
  arch.bounds.hi = detail::read_le<double>(is, "bound_hi");
  if (arch.channels > 4096 || arch.res_blocks > 4096 || arch.kernel > 63) {
    throw FormatError(path.string() + ": implausible architecture header");
  }
  try {
    arch.validate();
  } catch (const StructuralError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }

  ModelParams params(arch);
  for (Tensor& t : params.tensors()) {
    const auto name_len = detail::read_le<std::uint32_t>(is, "tensor name length");
    if (name_len > 256) throw FormatError(path.string() + ": tensor name too long");
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    if (!is) throw FormatError(path.string() + ": truncated tensor name");
    if (name != t.name) throw StructuralError(path.string() + ": expected tensor " + t.name + ", found " + name);
    const auto rank = detail::read_le<std::uint32_t>(is, "tensor rank");
    if (rank != t.shape.size()) throw StructuralError(path.string() + ": rank mismatch for " + name);
    for (std::size_t d = 0; d < rank; ++d) {
      const auto extent = detail::read_le<std::uint32_t>(is, "tensor dims");
      if (static_cast<int>(extent) != t.shape[d]) throw StructuralError(path.string() + ": shape mismatch for " + name);
    }
    detail::read_f64_block(is, t.data.data(), t.data.size());
  }
  if (is.peek() != std::char_traits<char>::eof()) throw FormatError(path.string() + ": trailing bytes");
  if (!params.all_finite()) throw StructuralError(path.string() + ": non-finite parameters");
  return params;
}

ModelParams load_checkpoint(const std::filesystem::path& path, const ArchSpec& expected) {
  ModelParams params = load_checkpoint(path);
  if (!(params.arch() == expected)) {
    throw StructuralError(path.string() + ": checkpoint architecture does not match the requested one");
  }
  return params;
}

}  // namespace acpit
