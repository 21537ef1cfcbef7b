// Copyright (c) 2026, acpit developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

namespace acpit {

class Grid;
using GridPtr = std::shared_ptr<const Grid>;

/// Periodic uniform grid on [-L/2, L/2]^dim with N points per axis.
///
/// Storage is x-fastest: the linear index of (i, j[, k]) is
/// i + N*(j + N*k). The grid owns the spectral transform plans used by
/// helmholtz_solve and is immutable after construction, so it can be shared
/// freely between threads.
class Grid {
 public:
  static GridPtr make(int dim, int n, double length);

  ~Grid();
  Grid(const Grid&) = delete;
  Grid& operator=(const Grid&) = delete;

  int dim() const { return dim_; }
  int n() const { return n_; }
  double length() const { return length_; }
  double h() const { return h_; }
  /// Coordinate of grid index 0 on every axis.
  double origin() const { return -0.5 * length_; }
  double coord(int index) const { return origin() + index * h_; }
  std::size_t size() const { return size_; }
  /// Stride of axis `axis` in the linear layout (1 for x).
  std::size_t stride(int axis) const { return strides_[axis]; }

  /// Eigenvalues of the periodic central-difference Laplacian, one per
  /// Fourier mode, laid out like a field.
  std::span<const double> symbol() const { return symbol_; }
  /// One-dimensional eigenvalues (2cos(2*pi*k/N) - 2)/h^2, k = 0..N-1.
  std::span<const double> axis_symbol() const { return axis_symbol_; }

  bool same_shape(const Grid& other) const;

  /// Number of complex coefficients in the half spectrum.
  std::size_t spectrum_size() const { return spectrum_size_; }

  void forward_transform(const double* in, std::complex<double>* out) const;
  /// Unnormalized inverse; destroys `in`.
  void inverse_transform(std::complex<double>* in, double* out) const;

 private:
  Grid(int dim, int n, double length);

  int dim_;
  int n_;
  double length_;
  double h_;
  std::size_t size_;
  std::size_t spectrum_size_;
  std::array<std::size_t, 3> strides_{};
  std::vector<double> axis_symbol_;
  std::vector<double> symbol_;
  void* plan_r2c_ = nullptr;
  void* plan_c2r_ = nullptr;
};

/// Scalar grid function. Value-like: copies deep-copy the data and share the
/// immutable grid.
class Field {
 public:
  Field() = default;
  explicit Field(GridPtr grid, double value = 0.0);
  Field(GridPtr grid, std::vector<double> data);

  const GridPtr& grid_ptr() const { return grid_; }
  const Grid& grid() const { return *grid_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double sum() const;
  double max_abs() const;
  bool all_finite() const;

 private:
  GridPtr grid_;
  std::vector<double> data_;
};

/// Periodic second-order central-difference Laplacian.
Field laplacian(const Field& u);
void laplacian_into(const Grid& grid, std::span<const double> u, std::span<double> out);

/// Reusable buffer for spectral solves; one per thread.
class SpectralWorkspace {
 public:
  explicit SpectralWorkspace(const Grid& grid) : spectrum_(grid.spectrum_size()) {}
  std::vector<std::complex<double>>& spectrum() { return spectrum_; }

 private:
  std::vector<std::complex<double>> spectrum_;
};

/// Solves (I - alpha * laplacian) u = rhs exactly by diagonalizing the
/// stencil in Fourier space. `rhs` and `out` may alias.
Field helmholtz_solve(const Field& rhs, double alpha);
void helmholtz_solve_into(const Grid& grid, std::span<const double> rhs, double alpha,
                          std::span<double> out, SpectralWorkspace& workspace);

/// Sup norm of a - b.
double sup_diff(std::span<const double> a, std::span<const double> b);

/// Cyclic shift of a field by `offset` grid points along each axis.
Field cyclic_shift(const Field& u, std::array<int, 3> offset);

/// Binary snapshot: "ACF1", u32 dim, u32 n, f64 length, N^dim f64 values,
/// all little-endian.
void write_field(const Field& u, const std::filesystem::path& path);
Field read_field(const std::filesystem::path& path);

}  // namespace acpit
