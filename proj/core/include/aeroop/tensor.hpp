// Copyright 2026 The aeroop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace aeroop {

using cplx = std::complex<double>;
using Shape = std::vector<std::size_t>;

enum class DType : std::uint8_t { kReal64 = 0, kComplex128 = 1 };

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);
std::string dtype_str(DType dtype);

/// Dense row-major real64 or complex128 array.
///
/// Invariants: the number of stored elements equals the product of the
/// extents, and every value is finite. Factories reject NaN/Inf with
/// NumericError; the only escape hatch is `unchecked_*`, used for error
/// reports and hot internal paths that validate afterwards.
class Tensor {
 public:
  Tensor() : shape_{}, dtype_(DType::kReal64), real_(1, 0.0) {}

  static Tensor zeros(Shape shape, DType dtype = DType::kReal64);
  static Tensor full(Shape shape, double value);
  static Tensor scalar(double value);
  static Tensor scalar(cplx value);
  static Tensor real(Shape shape, std::vector<double> values);
  static Tensor complex(Shape shape, std::vector<cplx> values);
  static Tensor unchecked_real(Shape shape, std::vector<double> values);
  static Tensor unchecked_complex(Shape shape, std::vector<cplx> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return is_complex() ? complex_.size() : real_.size(); }
  DType dtype() const { return dtype_; }
  bool is_complex() const { return dtype_ == DType::kComplex128; }

  std::span<const double> values() const;
  std::span<double> values();
  std::span<const cplx> cvalues() const;
  std::span<cplx> cvalues();

  /// Value of a one-element real tensor.
  double item() const;
  /// Value of a one-element tensor of either dtype.
  cplx citem() const;

  bool all_finite() const;
  Tensor reshaped(Shape shape) const;
  /// Elementwise bit equality including shape and dtype.
  bool bit_equal(const Tensor& other) const;

 private:
  Tensor(Shape shape, DType dtype) : shape_(std::move(shape)), dtype_(dtype) {}

  Shape shape_;
  DType dtype_;
  std::vector<double> real_;
  std::vector<cplx> complex_;
};

/// Largest absolute elementwise difference; shapes and dtypes must match.
double max_abs_diff(const Tensor& a, const Tensor& b);
/// Promote a real tensor to complex with zero imaginary part.
Tensor to_complex(const Tensor& t);
/// Frobenius norm.
double norm2(const Tensor& t);

}  // namespace aeroop
