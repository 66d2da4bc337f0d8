// Copyright 2026 The aeroop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "aeroop/autodiff.hpp"

// Differentiable primitives. Every function evaluates eagerly on the tape of
// its operands and records a backward rule. Elementwise binary primitives
// require equal shapes and dtypes; there is no implicit broadcasting or
// real/complex promotion (use `complex_from_real`).
namespace aeroop::ops {

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var div(const Var& a, const Var& b);
Var scale(const Var& x, double s);
/// Complex scale; x must be complex.
Var scale(const Var& x, cplx s);

/// 2-D matrix product (m x k) * (k x n).
Var matmul(const Var& a, const Var& b);
/// Contract a 2-D matrix A (m x n) with axis `axis` of x (extent n); the
/// result has extent m on that axis: y[..i.., r, ..j..] = sum_c A[r, c] x[..i.., c, ..j..].
Var axis_matmul(const Var& a, const Var& x, std::size_t axis);
/// Per-mode channel mixing: R (O x I x K0 x K1), Z (I x K0 x K1) ->
/// Y[o, p, q] = sum_i R[o, i, p, q] Z[i, p, q].
Var mode_mix(const Var& r, const Var& z);
/// Transpose of a 2-D tensor.
Var transpose(const Var& x);
/// Concatenate along axis 0; trailing extents and dtypes must agree.
Var concat(const std::vector<Var>& parts);
/// Rows [begin, end) along axis 0.
Var slice(const Var& x, std::size_t begin, std::size_t end);
/// Add a per-channel bias b (C) to x (C x ...).
Var add_channel_bias(const Var& x, const Var& b);

/// Complex input is activated split-wise: f(re) + i f(im).
Var relu(const Var& x);
/// Exact GELU, x * Phi(x); split-wise for complex input.
Var gelu(const Var& x);
Var sqrt(const Var& x);

Var complex(const Var& re, const Var& im);
Var complex_from_real(const Var& re);
Var real_part(const Var& z);
Var imag_part(const Var& z);
Var conj(const Var& z);
/// Elementwise modulus; real result for either dtype.
Var abs(const Var& x);

Var reduce_sum(const Var& x);
Var reduce_mean(const Var& x);

}  // namespace aeroop::ops
