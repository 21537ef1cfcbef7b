// Copyright (c) 2026, acpit developers
// SPDX-License-Identifier: Apache-2.0

#include "acpit/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numbers>

#include "acpit/error.hpp"
#include "binary_io.hpp"

namespace acpit {
namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

constexpr char kFieldMagic[4] = {'A', 'C', 'F', '1'};

}  // namespace

GridPtr Grid::make(int dim, int n, double length) {
  if (dim != 2 && dim != 3) throw ConfigError("grid dim must be 2 or 3, got " + std::to_string(dim));
  if (n < 4) throw ConfigError("grid n must be >= 4, got " + std::to_string(n));
  if (!(length > 0.0) || !std::isfinite(length)) throw ConfigError("grid length must be positive");
  return GridPtr(new Grid(dim, n, length));
}

Grid::Grid(int dim, int n, double length) : dim_(dim), n_(n), length_(length), h_(length / n) {
  size_ = 1;
  for (int a = 0; a < dim_; ++a) {
    strides_[a] = size_;
    size_ *= static_cast<std::size_t>(n_);
  }
  spectrum_size_ = size_ / n_ * static_cast<std::size_t>(n_ / 2 + 1);

  const double inv_h2 = 1.0 / (h_ * h_);
  axis_symbol_.resize(n_);
  for (int k = 0; k < n_; ++k) {
    axis_symbol_[k] = (2.0 * std::cos(2.0 * std::numbers::pi * k / n_) - 2.0) * inv_h2;
  }
  axis_symbol_[0] = 0.0;

  symbol_.resize(size_);
  for (std::size_t p = 0; p < size_; ++p) {
    double s = 0.0;
    std::size_t rest = p;
    for (int a = 0; a < dim_; ++a) {
      s += axis_symbol_[rest % n_];
      rest /= n_;
    }
    symbol_[p] = s;
  }

  // FFTW dims are slowest-first; x is our fastest axis and therefore the
  // halved one in the r2c layout.
  int dims[3];
  for (int a = 0; a < dim_; ++a) dims[a] = n_;
  std::vector<double> real_buf(size_);
  std::vector<std::complex<double>> cplx_buf(spectrum_size_);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  std::lock_guard lock(planner_mutex());
  plan_r2c_ = fftw_plan_dft_r2c(dim_, dims, real_buf.data(),
                                reinterpret_cast<fftw_complex*>(cplx_buf.data()), flags);
  plan_c2r_ = fftw_plan_dft_c2r(dim_, dims, reinterpret_cast<fftw_complex*>(cplx_buf.data()),
                                real_buf.data(), flags);
  if (!plan_r2c_ || !plan_c2r_) throw Error("failed to create FFT plans");
}

Grid::~Grid() {
  std::lock_guard lock(planner_mutex());
  if (plan_r2c_) fftw_destroy_plan(static_cast<fftw_plan>(plan_r2c_));
  if (plan_c2r_) fftw_destroy_plan(static_cast<fftw_plan>(plan_c2r_));
}

bool Grid::same_shape(const Grid& other) const {
  return dim_ == other.dim_ && n_ == other.n_ && length_ == other.length_;
}

void Grid::forward_transform(const double* in, std::complex<double>* out) const {
  fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_r2c_), const_cast<double*>(in),
                       reinterpret_cast<fftw_complex*>(out));
}

void Grid::inverse_transform(std::complex<double>* in, double* out) const {
  fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_c2r_), reinterpret_cast<fftw_complex*>(in), out);
}

Field::Field(GridPtr grid, double value) : grid_(std::move(grid)), data_(grid_->size(), value) {}

Field::Field(GridPtr grid, std::vector<double> data) : grid_(std::move(grid)), data_(std::move(data)) {
  if (data_.size() != grid_->size()) {
    throw StructuralError("field data length " + std::to_string(data_.size()) +
                          " does not match grid size " + std::to_string(grid_->size()));
  }
}

double Field::sum() const {
  double s = 0.0;
  for (double v : data_) s += v;
  return s;
}

double Field::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

bool Field::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void laplacian_into(const Grid& grid, std::span<const double> u, std::span<double> out) {
  const std::size_t total = grid.size();
  const std::size_t n = static_cast<std::size_t>(grid.n());
  const double inv_h2 = 1.0 / (grid.h() * grid.h());
  const double center = -2.0 * grid.dim();
  for (std::size_t p = 0; p < total; ++p) out[p] = center * u[p];

  for (int axis = 0; axis < grid.dim(); ++axis) {
    const std::size_t stride = grid.stride(axis);
    const std::size_t block = stride * n;
    for (std::size_t base = 0; base < total; base += block) {
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t jp = (j + 1) % n;
        const std::size_t jm = (j + n - 1) % n;
        double* o = out.data() + base + j * stride;
        const double* up = u.data() + base + jp * stride;
        const double* um = u.data() + base + jm * stride;
        for (std::size_t i = 0; i < stride; ++i) o[i] += up[i] + um[i];
      }
    }
  }
  for (std::size_t p = 0; p < total; ++p) out[p] *= inv_h2;
}

Field laplacian(const Field& u) {
  Field out(u.grid_ptr());
  laplacian_into(u.grid(), u.data(), out.data());
  return out;
}

void helmholtz_solve_into(const Grid& grid, std::span<const double> rhs, double alpha,
                          std::span<double> out, SpectralWorkspace& workspace) {
  if (!(alpha >= 0.0)) throw DomainError("helmholtz_solve requires alpha >= 0");
  auto& spec = workspace.spectrum();
  grid.forward_transform(rhs.data(), spec.data());

  const std::size_t n = static_cast<std::size_t>(grid.n());
  const std::size_t half = n / 2 + 1;
  const auto lam = grid.axis_symbol();
  const double norm = 1.0 / static_cast<double>(grid.size());
  std::size_t q = 0;
  if (grid.dim() == 2) {
    for (std::size_t ky = 0; ky < n; ++ky) {
      for (std::size_t kx = 0; kx < half; ++kx, ++q) {
        spec[q] *= norm / (1.0 - alpha * (lam[kx] + lam[ky]));
      }
    }
  } else {
    for (std::size_t kz = 0; kz < n; ++kz) {
      for (std::size_t ky = 0; ky < n; ++ky) {
        const double lyz = lam[ky] + lam[kz];
        for (std::size_t kx = 0; kx < half; ++kx, ++q) {
          spec[q] *= norm / (1.0 - alpha * (lam[kx] + lyz));
        }
      }
    }
  }
  grid.inverse_transform(spec.data(), out.data());
}

Field helmholtz_solve(const Field& rhs, double alpha) {
  Field out(rhs.grid_ptr());
  if (alpha == 0.0) {
    out.values() = rhs.values();
    return out;
  }
  SpectralWorkspace ws(rhs.grid());
  helmholtz_solve_into(rhs.grid(), rhs.data(), alpha, out.data(), ws);
  return out;
}

double sup_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw StructuralError("sup_diff: size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Field cyclic_shift(const Field& u, std::array<int, 3> offset) {
  const Grid& g = u.grid();
  const int n = g.n();
  Field out(u.grid_ptr());
  const int nz = g.dim() == 3 ? n : 1;
  auto wrap = [n](int i) { return ((i % n) + n) % n; };
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        const std::size_t src = i + static_cast<std::size_t>(n) * (j + static_cast<std::size_t>(n) * k);
        const int di = wrap(i + offset[0]);
        const int dj = wrap(j + offset[1]);
        const int dk = g.dim() == 3 ? wrap(k + offset[2]) : 0;
        const std::size_t dst = di + static_cast<std::size_t>(n) * (dj + static_cast<std::size_t>(n) * dk);
        out[dst] = u[src];
      }
    }
  }
  return out;
}

void write_field(const Field& u, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os.write(kFieldMagic, 4);
  detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(u.grid().dim()));
  detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(u.grid().n()));
  detail::write_le<double>(os, u.grid().length());
  detail::write_f64_block(os, u.data().data(), u.size());
  if (!os) throw IoError("write failed for " + path.string());
}

Field read_field(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || !std::equal(magic, magic + 4, kFieldMagic)) {
    throw FormatError(path.string() + ": bad magic, not an ACF1 field snapshot");
  }
  const auto dim = detail::read_le<std::uint32_t>(is, "dim");
  const auto n = detail::read_le<std::uint32_t>(is, "n");
  const auto length = detail::read_le<double>(is, "length");
  if ((dim != 2 && dim != 3) || n < 4 || n > (1u << 16) || !(length > 0.0)) {
    throw FormatError(path.string() + ": invalid header");
  }
  GridPtr grid = Grid::make(static_cast<int>(dim), static_cast<int>(n), length);
  std::vector<double> data(grid->size());
  detail::read_f64_block(is, data.data(), data.size());
  if (is.peek() != std::char_traits<char>::eof()) {
    throw FormatError(path.string() + ": trailing bytes after field data (dimension mismatch)");
  }
  return Field(std::move(grid), std::move(data));
}

}  // namespace acpit
