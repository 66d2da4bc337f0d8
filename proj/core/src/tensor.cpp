// Copyright 2026 The aeroop Authors
// SPDX-License-Identifier: Apache-2.0

#include "aeroop/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>

#include "aeroop/error.hpp"

namespace aeroop {

std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::string dtype_str(DType dtype) {
  return dtype == DType::kReal64 ? "real64" : "complex128";
}

namespace {

void check_count(const Shape& shape, std::size_t n) {
  if (shape_numel(shape) != n) {
    throw ShapeError("tensor: shape " + shape_str(shape) + " needs " +
                     std::to_string(shape_numel(shape)) + " values, got " +
                     std::to_string(n));
  }
}

}  // namespace

Tensor Tensor::zeros(Shape shape, DType dtype) {
  Tensor t(std::move(shape), dtype);
  const std::size_t n = shape_numel(t.shape_);
  if (t.is_complex()) {
    t.complex_.assign(n, cplx{});
  } else {
    t.real_.assign(n, 0.0);
  }
  return t;
}

Tensor Tensor::full(Shape shape, double value) {
  if (!std::isfinite(value)) throw NumericError("tensor: non-finite fill value");
  Tensor t(std::move(shape), DType::kReal64);
  t.real_.assign(shape_numel(t.shape_), value);
  return t;
}

Tensor Tensor::scalar(double value) { return real({}, {value}); }
Tensor Tensor::scalar(cplx value) { return complex({}, {value}); }

Tensor Tensor::real(Shape shape, std::vector<double> values) {
  Tensor t = unchecked_real(std::move(shape), std::move(values));
  if (!t.all_finite()) throw NumericError("tensor: non-finite value at creation");
  return t;
}

Tensor Tensor::complex(Shape shape, std::vector<cplx> values) {
  Tensor t = unchecked_complex(std::move(shape), std::move(values));
  if (!t.all_finite()) throw NumericError("tensor: non-finite value at creation");
  return t;
}

Tensor Tensor::unchecked_real(Shape shape, std::vector<double> values) {
  check_count(shape, values.size());
  Tensor t(std::move(shape), DType::kReal64);
  t.real_ = std::move(values);
  return t;
}

Tensor Tensor::unchecked_complex(Shape shape, std::vector<cplx> values) {
  check_count(shape, values.size());
  Tensor t(std::move(shape), DType::kComplex128);
  t.complex_ = std::move(values);
  return t;
}

std::span<const double> Tensor::values() const {
  if (is_complex()) throw ShapeError("tensor: real view of a complex128 tensor");
  return real_;
}

std::span<double> Tensor::values() {
  if (is_complex()) throw ShapeError("tensor: real view of a complex128 tensor");
  return real_;
}

std::span<const cplx> Tensor::cvalues() const {
  if (!is_complex()) throw ShapeError("tensor: complex view of a real64 tensor");
  return complex_;
}

std::span<cplx> Tensor::cvalues() {
  if (!is_complex()) throw ShapeError("tensor: complex view of a real64 tensor");
  return complex_;
}

double Tensor::item() const {
  if (size() != 1 || is_complex()) {
    throw ShapeError("tensor: item() needs a one-element real64 tensor, got " +
                     shape_str(shape_) + " " + dtype_str(dtype_));
  }
  return real_[0];
}

cplx Tensor::citem() const {
  if (size() != 1) throw ShapeError("tensor: citem() needs a one-element tensor");
  return is_complex() ? complex_[0] : cplx(real_[0], 0.0);
}

namespace {

// x * 0 is 0 for finite x and NaN otherwise; four lanes keep the loop branch-free.
bool finite_run(const double* p, std::size_t n) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc[0] += p[i] * 0.0;
    acc[1] += p[i + 1] * 0.0;
    acc[2] += p[i + 2] * 0.0;
    acc[3] += p[i + 3] * 0.0;
  }
  for (; i < n; ++i) acc[0] += p[i] * 0.0;
  return acc[0] + acc[1] + acc[2] + acc[3] == 0.0;
}

}  // namespace

bool Tensor::all_finite() const {
  if (is_complex()) {
    return finite_run(reinterpret_cast<const double*>(complex_.data()), 2 * complex_.size());
  }
  return finite_run(real_.data(), real_.size());
}

Tensor Tensor::reshaped(Shape shape) const {
  check_count(shape, size());
  Tensor t = *this;
  t.shape_ = std::move(shape);
  return t;
}

bool Tensor::bit_equal(const Tensor& other) const {
  if (shape_ != other.shape_ || dtype_ != other.dtype_) return false;
  if (is_complex()) {
    return complex_.size() == other.complex_.size() &&
           std::memcmp(complex_.data(), other.complex_.data(),
                       complex_.size() * sizeof(cplx)) == 0;
  }
  return real_.size() == other.real_.size() &&
         std::memcmp(real_.data(), other.real_.data(),
                     real_.size() * sizeof(double)) == 0;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape() || a.dtype() != b.dtype()) {
    throw ShapeError("max_abs_diff: " + shape_str(a.shape()) + " " +
                     dtype_str(a.dtype()) + " vs " + shape_str(b.shape()) + " " +
                     dtype_str(b.dtype()));
  }
  double m = 0.0;
  if (a.is_complex()) {
    auto x = a.cvalues(), y = b.cvalues();
    for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  } else {
    auto x = a.values(), y = b.values();
    for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  }
  return m;
}

Tensor to_complex(const Tensor& t) {
  if (t.is_complex()) return t;
  auto v = t.values();
  std::vector<cplx> out(v.begin(), v.end());
  return Tensor::unchecked_complex(t.shape(), std::move(out));
}

double norm2(const Tensor& t) {
  double s = 0.0;
  if (t.is_complex()) {
    for (const cplx& z : t.cvalues()) s += std::norm(z);
  } else {
    for (double x : t.values()) s += x * x;
  }
  return std::sqrt(s);
}

}  // namespace aeroop
