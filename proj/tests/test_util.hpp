// Copyright 2026 The aeroop Authors
// SPDX-License-Identifier: Apache-2.0

// Shared helpers for the unit and acceptance tests: seeded generators,
// brute-force oracles and a central-difference gradient checker.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "aeroop/autodiff.hpp"
#include "aeroop/model.hpp"
#include "aeroop/tensor.hpp"

namespace testutil {

using aeroop::cplx;
using aeroop::Shape;
using aeroop::Tensor;

// std::mt19937_64 on purpose: independent of the library's own generator.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo = -1.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(eng_);
  }
  std::size_t index(std::size_t lo, std::size_t hi) {  // inclusive
    return std::uniform_int_distribution<std::size_t>(lo, hi)(eng_);
  }
  bool coin() { return index(0, 1) == 1; }

  Tensor real(Shape shape, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(aeroop::shape_numel(shape));
    for (double& x : v) x = uniform(lo, hi);
    return Tensor::real(std::move(shape), std::move(v));
  }
  Tensor complex(Shape shape, double lo = -1.0, double hi = 1.0) {
    std::vector<cplx> v(aeroop::shape_numel(shape));
    for (cplx& z : v) {
      const double re = uniform(lo, hi);
      z = cplx(re, uniform(lo, hi));
    }
    return Tensor::complex(std::move(shape), std::move(v));
  }
  std::vector<cplx> cvec(std::size_t n) {
    std::vector<cplx> v(n);
    for (cplx& z : v) {
      const double re = uniform();
      z = cplx(re, uniform());
    }
    return v;
  }
  std::vector<double> vec(std::size_t n, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(n);
    for (double& x : v) x = uniform(lo, hi);
    return v;
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

// Centered unitary DFT by direct summation, shift s = floor(N / 2).
inline std::vector<cplx> centered_dft(const std::vector<cplx>& x) {
  const std::size_t n = x.size();
  const double s = static_cast<double>(n / 2);
  std::vector<cplx> out(n);
  for (std::size_t a = 0; a < n; ++a) {
    cplx acc = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
      const double ph = -2.0 * std::numbers::pi * (static_cast<double>(a) - s) *
                        (static_cast<double>(b) - s) / static_cast<double>(n);
      acc += x[b] * std::polar(1.0, ph);
    }
    out[a] = acc / std::sqrt(static_cast<double>(n));
  }
  return out;
}

// Unnormalized 2-D DFT of an H x W row-major field by direct summation.
inline std::vector<cplx> dft2(const std::vector<cplx>& x, std::size_t h, std::size_t w,
                              double sign = -1.0) {
  std::vector<cplx> out(h * w);
  for (std::size_t p = 0; p < h; ++p) {
    for (std::size_t q = 0; q < w; ++q) {
      cplx acc = 0.0;
      for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
          const double ph = sign * 2.0 * std::numbers::pi *
                            (static_cast<double>(p * r % h) / static_cast<double>(h) +
                             static_cast<double>(q * c % w) / static_cast<double>(w));
          acc += x[r * w + c] * std::polar(1.0, ph);
        }
      }
      out[p * w + q] = acc;
    }
  }
  return out;
}

inline double max_abs(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double l2(const std::vector<cplx>& a) {
  double s = 0.0;
  for (const cplx& z : a) s += std::norm(z);
  return std::sqrt(s);
}

struct GradReport {
  double max_rel = 0.0;
  std::string worst;
};

// Compares tape gradients of a scalar real loss with central differences.
// `loss` builds the graph from parameter vars placed on the given tape.
// For each parameter tensor the error is max|ad - fd| / max|fd| (falling back
// to an absolute error when the whole tensor's gradient vanishes); complex
// entries are perturbed along re and im, and the tape gradient holds
// dL/dre + i dL/dim.
using LossFn = std::function<aeroop::Var(aeroop::Tape&, const std::vector<aeroop::Var>&)>;

inline GradReport gradient_check(const std::vector<std::pair<std::string, Tensor>>& params,
                                 const LossFn& loss, double h = 1e-6) {
  aeroop::Tape tape;
  std::vector<aeroop::Var> vars;
  for (const auto& p : params) vars.push_back(tape.parameter(p.second));
  const aeroop::Var out = loss(tape, vars);
  const aeroop::GradientSet grads = tape.backward(out);

  auto eval = [&](const std::vector<Tensor>& values) {
    aeroop::Tape t(false);
    std::vector<aeroop::Var> vs;
    for (const auto& v : values) vs.push_back(t.constant(v));
    return loss(t, vs).value().item();
  };

  GradReport report;
  std::vector<Tensor> values;
  for (const auto& p : params) values.push_back(p.second);
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    const Tensor& ad = grads[vars[pi]];
    std::vector<double> ad_flat, fd_flat;
    const Tensor base = values[pi];
    const std::size_t n = base.size();
    for (std::size_t i = 0; i < n; ++i) {
      for (int part = 0; part < (base.is_complex() ? 2 : 1); ++part) {
        auto bump = [&](double d) {
          Tensor t = base;
          if (t.is_complex()) {
            t.cvalues()[i] += part == 0 ? cplx(d, 0.0) : cplx(0.0, d);
          } else {
            t.values()[i] += d;
          }
          values[pi] = t;
          const double v = eval(values);
          values[pi] = base;
          return v;
        };
        fd_flat.push_back((bump(h) - bump(-h)) / (2.0 * h));
        if (base.is_complex()) {
          ad_flat.push_back(part == 0 ? ad.cvalues()[i].real() : ad.cvalues()[i].imag());
        } else {
          ad_flat.push_back(ad.values()[i]);
        }
      }
    }
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < fd_flat.size(); ++i) {
      num = std::max(num, std::abs(ad_flat[i] - fd_flat[i]));
      den = std::max(den, std::abs(fd_flat[i]));
    }
    const double rel = den > 1e-12 ? num / den : num;
    if (rel >= report.max_rel) {
      report.max_rel = rel;
      report.worst = params[pi].first;
    }
  }
  return report;
}

struct ParamError {
  std::string name;
  double rel = 0.0;
};

// Same comparison as gradient_check, but over the parameters of a model:
// the tape gradient comes from a trainable binding, the finite differences
// from inference passes on a perturbed copy.
using ModelLossFn = std::function<aeroop::Var(const aeroop::BoundModel&)>;

inline std::vector<ParamError> model_gradient_check(const aeroop::OperatorModel& model,
                                                    const ModelLossFn& loss, double h = 1e-6) {
  aeroop::Tape tape;
  aeroop::BoundModel bound(model, tape, true);
  const aeroop::GradientSet grads = tape.backward(loss(bound));

  aeroop::OperatorModel probe = model;
  auto eval = [&]() {
    aeroop::Tape t(false);
    aeroop::BoundModel b(probe, t, false);
    return loss(b).value().item();
  };

  std::vector<ParamError> out;
  for (const auto& [name, var] : bound.parameters()) {
    const Tensor& ad = grads[var];
    const Tensor base = model.parameter(name);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < base.size(); ++i) {
      for (int part = 0; part < (base.is_complex() ? 2 : 1); ++part) {
        auto bump = [&](double d) {
          Tensor t = base;
          if (t.is_complex()) {
            t.cvalues()[i] += part == 0 ? cplx(d, 0.0) : cplx(0.0, d);
          } else {
            t.values()[i] += d;
          }
          probe.set_parameter(name, t);
          const double v = eval();
          probe.set_parameter(name, base);
          return v;
        };
        const double fd = (bump(h) - bump(-h)) / (2.0 * h);
        const double a = base.is_complex()
                             ? (part == 0 ? ad.cvalues()[i].real() : ad.cvalues()[i].imag())
                             : ad.values()[i];
        num = std::max(num, std::abs(a - fd));
        den = std::max(den, std::abs(fd));
      }
    }
    out.push_back({name, den > 1e-12 ? num / den : num});
  }
  return out;
}

// Field sampled from a band-limited periodic function on an n x n grid.
inline std::vector<double> band_limited(std::size_t n, const std::vector<std::array<double, 4>>& terms) {
  std::vector<double> v(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (const auto& [fi, fj, a, phase] : terms) {
        s += a * std::cos(2.0 * std::numbers::pi * (fi * i + fj * j) / static_cast<double>(n) +
                          phase);
      }
      v[i * n + j] = s;
    }
  }
  return v;
}

// Zero-padding spectral interpolation of an n x n real field to 2n x 2n.
inline std::vector<double> spectral_upsample(const std::vector<double>& x, std::size_t n) {
  std::vector<cplx> xc(x.begin(), x.end());
  const auto spec = dft2(xc, n, n);
  const std::size_t m = 2 * n;
  std::vector<cplx> fine(m * m, 0.0);
  auto signed_f = [n](std::size_t p) { return p <= n / 2 ? static_cast<long>(p) : static_cast<long>(p) - static_cast<long>(n); };
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = 0; q < n; ++q) {
      const long fp = signed_f(p), fq = signed_f(q);
      const std::size_t P = static_cast<std::size_t>((fp + static_cast<long>(m)) % static_cast<long>(m));
      const std::size_t Q = static_cast<std::size_t>((fq + static_cast<long>(m)) % static_cast<long>(m));
      fine[P * m + Q] = spec[p * n + q];
    }
  }
  const auto back = dft2(fine, m, m, 1.0);
  std::vector<double> out(m * m);
  for (std::size_t i = 0; i < m * m; ++i) out[i] = back[i].real() / static_cast<double>(n * n);
  return out;
}

}  // namespace testutil
