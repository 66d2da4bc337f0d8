// Copyright 2026 The aeroop Authors
// SPDX-License-Identifier: Apache-2.0

#include "aeroop/frft.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "aeroop/error.hpp"

namespace aeroop {
namespace {

constexpr double kPi = std::numbers::pi;

// Eigenvectors of S restricted to one parity subspace, sorted by descending
// eigenvalue. `basis` columns span the subspace in the uncentered index space.
std::vector<Eigen::VectorXd> subspace_vectors(const Eigen::MatrixXd& s,
                                              const Eigen::MatrixXd& basis,
                                              double& residual) {
  std::vector<Eigen::VectorXd> out;
  if (basis.cols() == 0) return out;
  const Eigen::MatrixXd reduced = basis.transpose() * s * basis;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(reduced);
  if (solver.info() != Eigen::Success) {
    throw NumericError("build_basis: eigensolver did not converge on a subspace of size " +
                       std::to_string(basis.cols()));
  }
  const Eigen::VectorXd& vals = solver.eigenvalues();
  const Eigen::MatrixXd& vecs = solver.eigenvectors();
  residual = std::max(residual, (reduced * vecs - vecs * vals.asDiagonal()).cwiseAbs().maxCoeff());
  // Eigen returns ascending eigenvalues.
  for (Eigen::Index j = vals.size() - 1; j >= 0; --j) {
    Eigen::VectorXd v = basis * vecs.col(j);
    // Fix the sign so the largest-magnitude entry (first on ties) is positive.
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i) {
      if (std::abs(v(i)) > std::abs(v(arg)) + 1e-12) arg = i;
    }
    if (v(arg) < 0) v = -v;
    out.push_back(std::move(v));
  }
  return out;
}

void require_length(std::size_t got, const DFrFTBasis& basis, const char* op) {
  if (got != basis.n) {
    throw ShapeError(std::string(op) + ": length " + std::to_string(got) +
                     " does not match basis size " + std::to_string(basis.n));
  }
}

// y = E diag(d) E^T x
std::vector<cplx> apply_diag(std::span<const cplx> x, std::span<const cplx> d,
                             const DFrFTBasis& basis) {
  const std::size_t n = basis.n;
  std::vector<cplx> c(n);
  for (std::size_t a = 0; a < n; ++a) {
    const double* row = basis.e.data() + a * n;
    for (std::size_t j = 0; j < n; ++j) c[j] += row[j] * x[a];
  }
  for (std::size_t j = 0; j < n; ++j) c[j] *= d[j];
  std::vector<cplx> y(n);
  for (std::size_t a = 0; a < n; ++a) {
    const double* row = basis.e.data() + a * n;
    cplx acc{};
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * c[j];
    y[a] = acc;
  }
  return y;
}

std::vector<cplx> phase_derivatives(const DFrFTBasis& basis, double alpha) {
  std::vector<cplx> d = frft_phases(basis, alpha);
  for (std::size_t j = 0; j < d.size(); ++j) {
    d[j] *= cplx(0.0, -kPi * basis.hermite[j] / 2.0);
  }
  return d;
}

Tensor rows_with_diag(const DFrFTBasis& basis, std::span<const cplx> d,
                      std::span<const std::size_t> rows) {
  const std::size_t n = basis.n;
  std::vector<cplx> out(rows.size() * n);
  std::vector<cplx> scaled(n);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= n) {
      throw ShapeError("frft_matrix: row " + std::to_string(rows[r]) +
                       " out of range for size " + std::to_string(n));
    }
    const double* er = basis.e.data() + rows[r] * n;
    for (std::size_t j = 0; j < n; ++j) scaled[j] = er[j] * d[j];
    cplx* dst = out.data() + r * n;
    for (std::size_t b = 0; b < n; ++b) {
      const double* eb = basis.e.data() + b * n;
      cplx acc{};
      for (std::size_t j = 0; j < n; ++j) acc += scaled[j] * eb[j];
      dst[b] = acc;
    }
  }
  return Tensor::complex({rows.size(), n}, std::move(out));
}

}  // namespace

DFrFTBasis build_basis(std::size_t n) {
  if (n < 2) throw ShapeError("build_basis: size must be at least 2, got " + std::to_string(n));
  const auto N = static_cast<Eigen::Index>(n);

  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    s(i, i) = 2.0 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n)) - 4.0;
    s(i, (i + 1) % N) += 1.0;
    s(i, (i + N - 1) % N) += 1.0;
  }

  // Parity subspaces with respect to i -> -i mod N.
  const Eigen::Index half = N / 2;
  const Eigen::Index pairs = (N - 1) / 2;
  Eigen::MatrixXd even = Eigen::MatrixXd::Zero(N, N % 2 == 0 ? half + 1 : pairs + 1);
  Eigen::MatrixXd odd = Eigen::MatrixXd::Zero(N, pairs);
  const double r = 1.0 / std::numbers::sqrt2;
  even(0, 0) = 1.0;
  for (Eigen::Index j = 1; j <= pairs; ++j) {
    even(j, j) = r;
    even(N - j, j) = r;
    odd(j, j - 1) = r;
    odd(N - j, j - 1) = -r;
  }
  if (N % 2 == 0) even(half, half) = 1.0;

  double residual = 0.0;
  const auto even_vecs = subspace_vectors(s, even, residual);
  const auto odd_vecs = subspace_vectors(s, odd, residual);

  // Columns in ascending Hermite index: even vectors take 0, 2, 4, ...,
  // odd vectors 1, 3, 5, ....
  std::vector<std::pair<int, const Eigen::VectorXd*>> cols;
  for (std::size_t j = 0; j < even_vecs.size(); ++j)
    cols.emplace_back(static_cast<int>(2 * j), &even_vecs[j]);
  for (std::size_t j = 0; j < odd_vecs.size(); ++j)
    cols.emplace_back(static_cast<int>(2 * j + 1), &odd_vecs[j]);
  std::sort(cols.begin(), cols.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  // Centered rows: row a of the centered basis is row (a - s) mod N of the
  // uncentered one.
  DFrFTBasis basis;
  basis.n = n;
  basis.e.assign(n * n, 0.0);
  basis.hermite.resize(n);
  const std::size_t shift = n / 2;
  for (std::size_t j = 0; j < n; ++j) {
    basis.hermite[j] = cols[j].first;
    const Eigen::VectorXd& v = *cols[j].second;
    for (std::size_t a = 0; a < n; ++a) {
      basis.e[a * n + j] = v(static_cast<Eigen::Index>((a + n - shift) % n));
    }
  }

  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> e(
      basis.e.data(), N, N);
  const double ortho = (e.transpose() * e - Eigen::MatrixXd::Identity(N, N)).cwiseAbs().maxCoeff();
  if (ortho > 1e-10 || residual > 1e-8 * (1.0 + s.cwiseAbs().maxCoeff())) {
    throw NumericError("build_basis: decomposition failed for N=" + std::to_string(n) +
                       " (orthogonality residual " + std::to_string(ortho) +
                       ", eigen residual " + std::to_string(residual) + ")");
  }
  return basis;
}

std::shared_ptr<const DFrFTBasis> dfrft_basis(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, std::shared_ptr<const DFrFTBasis>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  auto basis = std::make_shared<const DFrFTBasis>(build_basis(n));
  cache.emplace(n, basis);
  return basis;
}

std::vector<cplx> frft_phases(const DFrFTBasis& basis, double alpha) {
  if (!std::isfinite(alpha)) throw NumericError("frft: non-finite order");
  std::vector<cplx> d(basis.n);
  for (std::size_t j = 0; j < basis.n; ++j) {
    // Reduce k * alpha modulo 4 before taking the phase so that orders
    // differing by 4 produce identical values.
    const double t = std::fmod(basis.hermite[j] * alpha, 4.0);
    d[j] = std::polar(1.0, -kPi * t / 2.0);
  }
  return d;
}

std::vector<cplx> frft_1d(std::span<const cplx> x, double alpha, const DFrFTBasis& basis) {
  require_length(x.size(), basis, "frft_1d");
  return apply_diag(x, frft_phases(basis, alpha), basis);
}

std::vector<cplx> frft_1d_dalpha(std::span<const cplx> x, double alpha,
                                 const DFrFTBasis& basis) {
  require_length(x.size(), basis, "frft_1d_dalpha");
  return apply_diag(x, phase_derivatives(basis, alpha), basis);
}

Tensor frft_matrix(const DFrFTBasis& basis, double alpha, std::span<const std::size_t> rows) {
  return rows_with_diag(basis, frft_phases(basis, alpha), rows);
}

Tensor frft_matrix_dalpha(const DFrFTBasis& basis, double alpha,
                          std::span<const std::size_t> rows) {
  return rows_with_diag(basis, phase_derivatives(basis, alpha), rows);
}

Tensor frft_2d(const Tensor& field, double alpha, const DFrFTBasis& rows_basis,
               const DFrFTBasis& cols_basis, AxisOrder order) {
  if (field.rank() != 2 || !field.is_complex() || field.dim(0) != rows_basis.n ||
      field.dim(1) != cols_basis.n) {
    throw ShapeError("frft_2d: field " + shape_str(field.shape()) + " " +
                     dtype_str(field.dtype()) + " does not match bases " +
                     std::to_string(rows_basis.n) + "x" + std::to_string(cols_basis.n));
  }
  const std::size_t h = rows_basis.n, w = cols_basis.n;
  std::vector<cplx> data(field.cvalues().begin(), field.cvalues().end());
  const auto d0 = frft_phases(rows_basis, alpha);
  const auto d1 = frft_phases(cols_basis, alpha);
  auto along_cols = [&] {
    for (std::size_t i = 0; i < h; ++i) {
      std::span<const cplx> row(data.data() + i * w, w);
      auto y = apply_diag(row, d1, cols_basis);
      std::copy(y.begin(), y.end(), data.begin() + i * w);
    }
  };
  auto along_rows = [&] {
    std::vector<cplx> col(h);
    for (std::size_t j = 0; j < w; ++j) {
      for (std::size_t i = 0; i < h; ++i) col[i] = data[i * w + j];
      auto y = apply_diag(col, d0, rows_basis);
      for (std::size_t i = 0; i < h; ++i) data[i * w + j] = y[i];
    }
  };
  if (order == AxisOrder::kRowsFirst) {
    along_rows();
    along_cols();
  } else {
    along_cols();
    along_rows();
  }
  return Tensor::complex({h, w}, std::move(data));
}

Var frft_rows(const Var& alpha, std::shared_ptr<const DFrFTBasis> basis,
              std::vector<std::size_t> rows) {
  if (alpha.is_complex() || alpha.value().size() != 1) {
    throw ShapeError("frft_rows: order must be a real scalar, got " + shape_str(alpha.shape()));
  }
  auto shared_rows = std::make_shared<const std::vector<std::size_t>>(std::move(rows));
  return alpha.tape()->apply(
      "frft_rows", {alpha},
      [basis, shared_rows](std::span<const Tensor* const> in) {
        return frft_matrix(*basis, in[0]->item(), *shared_rows);
      },
      [basis, shared_rows](const BackwardArgs& g) {
        const Tensor dm = frft_matrix_dalpha(*basis, g.inputs[0]->item(), *shared_rows);
        auto gm = g.grad.cvalues();
        auto dv = dm.cvalues();
        double acc = 0.0;
        for (std::size_t i = 0; i < gm.size(); ++i) {
          acc += gm[i].real() * dv[i].real() + gm[i].imag() * dv[i].imag();
        }
        g.grad_inputs[0] = Tensor::scalar(acc).reshaped(g.inputs[0]->shape());
      });
}

std::vector<int> kept_frequencies(std::size_t n, std::size_t kmax, int axis) {
  if (kmax < 1 || kmax > n) {
    throw ShapeError("modes: kmax " + std::to_string(kmax) + " out of range for axis size " +
                     std::to_string(n));
  }
  std::vector<int> out;
  const auto k = static_cast<long>(kmax);
  const auto len = static_cast<long>(n);
  for (long i = 0; i < len; ++i) {
    if (i <= k - 1) {
      out.push_back(static_cast<int>(i));
    } else if (axis == 0 && i >= len - k + 1) {
      out.push_back(static_cast<int>(i - len));
    }
  }
  return out;
}

std::vector<std::size_t> kept_positions(std::size_t n, std::size_t kmax, int axis,
                                        ModeOrdering ordering) {
  std::vector<std::size_t> out;
  if (ordering == ModeOrdering::kHermite) {
    if (kmax < 1 || kmax > n) {
      throw ShapeError("modes: kmax " + std::to_string(kmax) +
                       " out of range for axis size " + std::to_string(n));
    }
    const auto basis = dfrft_basis(n);
    for (std::size_t j = 0; j < n; ++j) {
      if (basis->hermite[j] < static_cast<int>(kmax)) out.push_back(j);
    }
    return out;
  }
  const auto len = static_cast<long>(n);
  const long shift = ordering == ModeOrdering::kCentered ? len / 2 : 0;
  for (int f : kept_frequencies(n, kmax, axis)) {
    out.push_back(static_cast<std::size_t>(((shift + f) % len + len) % len));
  }
  return out;
}

Tensor truncate_modes(const Tensor& coeffs, std::size_t kmax, ModeOrdering ordering,
                      const DFrFTBasis* rows_basis, const DFrFTBasis* cols_basis) {
  if (coeffs.rank() != 2 || !coeffs.is_complex()) {
    throw ShapeError("truncate_modes: expects a complex H x W array, got " +
                     shape_str(coeffs.shape()) + " " + dtype_str(coeffs.dtype()));
  }
  const std::size_t h = coeffs.dim(0), w = coeffs.dim(1);
  if (kmax < 1 || kmax > std::min(h, w)) {
    throw ShapeError("truncate_modes: kmax " + std::to_string(kmax) + " out of range for " +
                     shape_str(coeffs.shape()));
  }
  std::vector<char> keep0(h, 0), keep1(w, 0);
  if (ordering == ModeOrdering::kHermite) {
    if (rows_basis == nullptr || cols_basis == nullptr || rows_basis->n != h ||
        cols_basis->n != w) {
      throw ShapeError("truncate_modes: hermite ordering needs bases matching " +
                       shape_str(coeffs.shape()));
    }
    for (std::size_t j = 0; j < h; ++j) keep0[j] = rows_basis->hermite[j] < static_cast<int>(kmax);
    for (std::size_t j = 0; j < w; ++j) keep1[j] = cols_basis->hermite[j] < static_cast<int>(kmax);
  } else {
    for (std::size_t p : kept_positions(h, kmax, 0, ordering)) keep0[p] = 1;
    for (std::size_t p : kept_positions(w, kmax, 1, ordering)) keep1[p] = 1;
  }
  Tensor out = coeffs;
  auto v = out.cvalues();
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j)
      if (!(keep0[i] && keep1[j])) v[i * w + j] = cplx{};
  return out;
}

Tensor eigen_coefficients(const Tensor& field, const DFrFTBasis& rows_basis,
                          const DFrFTBasis& cols_basis) {
  if (field.rank() != 2 || !field.is_complex() || field.dim(0) != rows_basis.n ||
      field.dim(1) != cols_basis.n) {
    throw ShapeError("eigen_coefficients: field " + shape_str(field.shape()) +
                     " does not match bases");
  }
  const std::size_t h = rows_basis.n, w = cols_basis.n;
  auto x = field.cvalues();
  // T = X E1, then C = E0^T T.
  std::vector<cplx> t(h * w), c(h * w);
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t b = 0; b < w; ++b)
      for (std::size_t q = 0; q < w; ++q) t[i * w + q] += x[i * w + b] * cols_basis.at(b, q);
  for (std::size_t a = 0; a < h; ++a)
    for (std::size_t p = 0; p < h; ++p)
      for (std::size_t q = 0; q < w; ++q) c[p * w + q] += rows_basis.at(a, p) * t[a * w + q];
  return Tensor::complex({h, w}, std::move(c));
}

Tensor from_eigen_coefficients(const Tensor& coeffs, const DFrFTBasis& rows_basis,
                               const DFrFTBasis& cols_basis) {
  if (coeffs.rank() != 2 || !coeffs.is_complex() || coeffs.dim(0) != rows_basis.n ||
      coeffs.dim(1) != cols_basis.n) {
    throw ShapeError("from_eigen_coefficients: array " + shape_str(coeffs.shape()) +
                     " does not match bases");
  }
  const std::size_t h = rows_basis.n, w = cols_basis.n;
  auto c = coeffs.cvalues();
  std::vector<cplx> t(h * w), x(h * w);
  for (std::size_t p = 0; p < h; ++p)
    for (std::size_t q = 0; q < w; ++q)
      for (std::size_t b = 0; b < w; ++b) t[p * w + b] += c[p * w + q] * cols_basis.at(b, q);
  for (std::size_t a = 0; a < h; ++a)
    for (std::size_t p = 0; p < h; ++p)
      for (std::size_t b = 0; b < w; ++b) x[a * w + b] += rows_basis.at(a, p) * t[p * w + b];
  return Tensor::complex({h, w}, std::move(x));
}

}  // namespace aeroop
