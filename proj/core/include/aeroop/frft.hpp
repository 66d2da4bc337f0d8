// Copyright 2026 The aeroop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "aeroop/autodiff.hpp"
#include "aeroop/tensor.hpp"

namespace aeroop {

/// Orthonormal DFT eigenbasis in the centered convention.
///
/// Column j of E is a Hermite-Gaussian-like eigenvector of the centered unitary
/// DFT C[a, b] = exp(-2 pi i (a - s)(b - s) / N) / sqrt(N), s = floor(N / 2),
/// with eigenvalue exp(-i pi k_j / 2), k_j = hermite[j]. The order-alpha
/// transform is F^alpha = E diag(exp(-i pi k alpha / 2)) E^T, which is complex
/// symmetric, exactly unitary and exactly additive in alpha.
struct DFrFTBasis {
  std::size_t n = 0;
  /// Row-major N x N, e[a * n + j] = E[a, j].
  std::vector<double> e;
  /// Hermite index of each column; column order is ascending in index.
  std::vector<int> hermite;

  double at(std::size_t row, std::size_t col) const { return e[row * n + col]; }
};

/// Builds the basis from the eigenvectors of the commuting matrix
/// S = circulant second difference + diag(2 cos(2 pi n / N) - 4), split into
/// its even and odd subspaces. Throws NumericError if the decomposition fails
/// its residual checks.
DFrFTBasis build_basis(std::size_t n);
/// Cached build_basis; thread-safe, the returned basis is immutable.
std::shared_ptr<const DFrFTBasis> dfrft_basis(std::size_t n);

/// Eigenvalues exp(-i pi k alpha / 2) of F^alpha, per basis column.
std::vector<cplx> frft_phases(const DFrFTBasis& basis, double alpha);

std::vector<cplx> frft_1d(std::span<const cplx> x, double alpha, const DFrFTBasis& basis);
/// Derivative of frft_1d with respect to alpha.
std::vector<cplx> frft_1d_dalpha(std::span<const cplx> x, double alpha,
                                 const DFrFTBasis& basis);

/// Selected rows of F^alpha as a complex (rows x N) tensor.
Tensor frft_matrix(const DFrFTBasis& basis, double alpha,
                   std::span<const std::size_t> rows);
/// Selected rows of dF^alpha / dalpha.
Tensor frft_matrix_dalpha(const DFrFTBasis& basis, double alpha,
                          std::span<const std::size_t> rows);

enum class AxisOrder { kRowsFirst, kColsFirst };

/// Separable order-alpha transform of a complex H x W field.
Tensor frft_2d(const Tensor& field, double alpha, const DFrFTBasis& rows_basis,
               const DFrFTBasis& cols_basis, AxisOrder order = AxisOrder::kRowsFirst);

/// Differentiable rows of F^alpha: `alpha` is a real scalar var, the result a
/// constant-shape (rows x N) complex var.
Var frft_rows(const Var& alpha, std::shared_ptr<const DFrFTBasis> basis,
              std::vector<std::size_t> rows);

/// Unnormalized forward 2-D DFT of a complex H x W field,
/// X[p, q] = sum x[h, w] exp(-2 pi i (p h / H + q w / W)).
Tensor fft_2d(const Tensor& field);
/// Inverse of fft_2d, including the 1/(HW) factor.
Tensor ifft_2d(const Tensor& spectrum);

/// Coefficient layouts understood by truncate_modes.
///  - kFrequency: uncentered DFT coefficients; axis 0 keeps
///    {0..k-1} U {N-k+1..N-1}, axis 1 keeps {0..k-1}.
///  - kCentered: centered-DFT coefficients; the same signed frequencies as
///    kFrequency, stored at position (s + f) mod N.
///  - kHermite: eigen-coefficients E0^T X E1; keeps hermite index < k per axis.
enum class ModeOrdering { kFrequency, kCentered, kHermite };

/// Signed frequencies kept on one axis, in storage order: 0..k-1 then
/// -(k-1)..-1 on axis 0 (deduplicated when 2k-1 > n), 0..k-1 on axis 1.
std::vector<int> kept_frequencies(std::size_t n, std::size_t kmax, int axis);
/// Storage positions of the kept coefficients on one axis.
std::vector<std::size_t> kept_positions(std::size_t n, std::size_t kmax, int axis,
                                        ModeOrdering ordering);

/// Zero every coefficient outside the kept set. For kHermite the bases of
/// both axes are required.
Tensor truncate_modes(const Tensor& coeffs, std::size_t kmax, ModeOrdering ordering,
                      const DFrFTBasis* rows_basis = nullptr,
                      const DFrFTBasis* cols_basis = nullptr);

/// E0^T X E1 and its inverse E0 C E1^T.
Tensor eigen_coefficients(const Tensor& field, const DFrFTBasis& rows_basis,
                          const DFrFTBasis& cols_basis);
Tensor from_eigen_coefficients(const Tensor& coeffs, const DFrFTBasis& rows_basis,
                               const DFrFTBasis& cols_basis);

}  // namespace aeroop
