// Copyright 2026 The aeroop Authors
// SPDX-License-Identifier: Apache-2.0

#include "aeroop/ops.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <type_traits>

#include <Eigen/Dense>

#include "aeroop/error.hpp"

namespace aeroop::ops {
namespace {

Tape& tape_of(const Var& v) {
  if (!v.valid() || v.tape() == nullptr) throw Error("ops: invalid operand");
  return *v.tape();
}

[[noreturn]] void shape_fail(std::string_view op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op) + ": incompatible operands " + shape_str(a.shape()) +
                   " " + dtype_str(a.dtype()) + " and " + shape_str(b.shape()) + " " +
                   dtype_str(b.dtype()));
}

void require_same(std::string_view op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape() || a.dtype() != b.dtype()) shape_fail(op, a, b);
}

void require_real(std::string_view op, const Tensor& x) {
  if (x.is_complex()) {
    throw ShapeError(std::string(op) + ": expects real64, got complex128 " +
                     shape_str(x.shape()));
  }
}

void require_complex(std::string_view op, const Tensor& x) {
  if (!x.is_complex()) {
    throw ShapeError(std::string(op) + ": expects complex128, got real64 " +
                     shape_str(x.shape()));
  }
}

inline double cj(double x) { return x; }
inline cplx cj(const cplx& z) { return std::conj(z); }

template <class T>
std::span<const T> view(const Tensor& t) {
  if constexpr (std::is_same_v<T, double>) {
    return t.values();
  } else {
    return t.cvalues();
  }
}

template <class T>
std::span<T> view_mut(Tensor& t) {
  if constexpr (std::is_same_v<T, double>) {
    return t.values();
  } else {
    return t.cvalues();
  }
}

// Applies f elementwise over (a, b) producing a tensor with a's dtype.
template <class F>
Tensor zip(const Tensor& a, const Tensor& b, F f) {
  Tensor out = Tensor::zeros(a.shape(), a.dtype());
  if (a.is_complex()) {
    if constexpr (std::is_invocable_r_v<cplx, F, cplx, cplx>) {
      auto x = a.cvalues(), y = b.cvalues();
      auto o = out.cvalues();
      for (std::size_t i = 0; i < o.size(); ++i) o[i] = f(x[i], y[i]);
      return out;
    }
  } else {
    if constexpr (std::is_convertible_v<std::invoke_result_t<F, double, double>, double>) {
      auto x = a.values(), y = b.values();
      auto o = out.values();
      for (std::size_t i = 0; i < o.size(); ++i) o[i] = f(x[i], y[i]);
      return out;
    }
  }
  throw ShapeError("unsupported dtype " + dtype_str(a.dtype()));
}

template <class F>
Tensor map(const Tensor& a, F f) {
  Tensor out = Tensor::zeros(a.shape(), a.dtype());
  if (a.is_complex()) {
    if constexpr (std::is_invocable_r_v<cplx, F, cplx>) {
      auto x = a.cvalues();
      auto o = out.cvalues();
      for (std::size_t i = 0; i < o.size(); ++i) o[i] = f(x[i]);
      return out;
    }
  } else {
    if constexpr (std::is_convertible_v<std::invoke_result_t<F, double>, double>) {
      auto x = a.values();
      auto o = out.values();
      for (std::size_t i = 0; i < o.size(); ++i) o[i] = f(x[i]);
      return out;
    }
  }
  throw ShapeError("unsupported dtype " + dtype_str(a.dtype()));
}

Tensor negate(const Tensor& t) {
  return map(t, [](auto v) { return -v; });
}

struct AxisView {
  std::size_t outer = 1, extent = 1, inner = 1;
};

AxisView axis_view(const Shape& s, std::size_t axis) {
  AxisView v;
  for (std::size_t i = 0; i < axis; ++i) v.outer *= s[i];
  v.extent = s[axis];
  for (std::size_t i = axis + 1; i < s.size(); ++i) v.inner *= s[i];
  return v;
}

template <class T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using ConstMap = Eigen::Map<const RowMat<T>>;
template <class T>
using MutMap = Eigen::Map<RowMat<T>>;

// y[o, r, j] = sum_c A[r, c] x[o, c, j]
template <class T>
void axis_matmul_fwd(std::span<const T> A, std::span<const T> x, std::span<T> y,
                     std::size_t m, const AxisView& v) {
  const auto n = static_cast<Eigen::Index>(v.extent);
  const auto mi = static_cast<Eigen::Index>(m);
  const auto inner = static_cast<Eigen::Index>(v.inner);
  ConstMap<T> a(A.data(), mi, n);
  if (inner == 1) {
    // Contracting the last axis: one (outer x n) * (n x m) product.
    const auto outer = static_cast<Eigen::Index>(v.outer);
    MutMap<T>(y.data(), outer, mi).noalias() = ConstMap<T>(x.data(), outer, n) * a.transpose();
    return;
  }
  for (std::size_t o = 0; o < v.outer; ++o) {
    MutMap<T>(y.data() + o * m * v.inner, mi, inner).noalias() =
        a * ConstMap<T>(x.data() + o * v.extent * v.inner, n, inner);
  }
}

// gx[o, c, j] = sum_r conj(A[r, c]) g[o, r, j]
template <class T>
void axis_matmul_bwd_x(std::span<const T> A, std::span<const T> g, std::span<T> gx,
                       std::size_t m, const AxisView& v) {
  const auto n = static_cast<Eigen::Index>(v.extent);
  const auto mi = static_cast<Eigen::Index>(m);
  const auto inner = static_cast<Eigen::Index>(v.inner);
  ConstMap<T> a(A.data(), mi, n);
  if (inner == 1) {
    const auto outer = static_cast<Eigen::Index>(v.outer);
    MutMap<T>(gx.data(), outer, n).noalias() = ConstMap<T>(g.data(), outer, mi) * a.conjugate();
    return;
  }
  for (std::size_t o = 0; o < v.outer; ++o) {
    MutMap<T>(gx.data() + o * v.extent * v.inner, n, inner).noalias() =
        a.adjoint() * ConstMap<T>(g.data() + o * m * v.inner, mi, inner);
  }
}

// gA[r, c] = sum_{o, j} g[o, r, j] conj(x[o, c, j])
template <class T>
void axis_matmul_bwd_a(std::span<const T> x, std::span<const T> g, std::span<T> gA,
                       std::size_t m, const AxisView& v) {
  const auto n = static_cast<Eigen::Index>(v.extent);
  const auto mi = static_cast<Eigen::Index>(m);
  const auto inner = static_cast<Eigen::Index>(v.inner);
  MutMap<T> ga(gA.data(), mi, n);
  if (inner == 1) {
    const auto outer = static_cast<Eigen::Index>(v.outer);
    ga.noalias() += ConstMap<T>(g.data(), outer, mi).transpose() *
                    ConstMap<T>(x.data(), outer, n).conjugate();
    return;
  }
  for (std::size_t o = 0; o < v.outer; ++o) {
    ga.noalias() += ConstMap<T>(g.data() + o * m * v.inner, mi, inner) *
                    ConstMap<T>(x.data() + o * v.extent * v.inner, n, inner).adjoint();
  }
}

}  // namespace

Var add(const Var& a, const Var& b) {
  return tape_of(a).apply(
      "add", {a, b},
      [](std::span<const Tensor* const> in) {
        require_same("add", *in[0], *in[1]);
        return zip(*in[0], *in[1], [](auto x, auto y) { return x + y; });
      },
      [](const BackwardArgs& g) {
        if (g.need[0]) g.grad_inputs[0] = g.grad;
        if (g.need[1]) g.grad_inputs[1] = g.grad;
      });
}

Var sub(const Var& a, const Var& b) {
  return tape_of(a).apply(
      "sub", {a, b},
      [](std::span<const Tensor* const> in) {
        require_same("sub", *in[0], *in[1]);
        return zip(*in[0], *in[1], [](auto x, auto y) { return x - y; });
      },
      [](const BackwardArgs& g) {
        if (g.need[0]) g.grad_inputs[0] = g.grad;
        if (g.need[1]) g.grad_inputs[1] = negate(g.grad);
      });
}

Var mul(const Var& a, const Var& b) {
  return tape_of(a).apply(
      "mul", {a, b},
      [](std::span<const Tensor* const> in) {
        require_same("mul", *in[0], *in[1]);
        return zip(*in[0], *in[1], [](auto x, auto y) { return x * y; });
      },
      [](const BackwardArgs& g) {
        auto rule = [](auto gv, auto other) { return gv * cj(other); };
        if (g.need[0]) g.grad_inputs[0] = zip(g.grad, *g.inputs[1], rule);
        if (g.need[1]) g.grad_inputs[1] = zip(g.grad, *g.inputs[0], rule);
      });
}

Var div(const Var& a, const Var& b) {
  return tape_of(a).apply(
      "div", {a, b},
      [](std::span<const Tensor* const> in) {
        require_same("div", *in[0], *in[1]);
        return zip(*in[0], *in[1], [](auto x, auto y) { return x / y; });
      },
      [](const BackwardArgs& g) {
        // y = a / b: ga = g / conj(b), gb = -g * conj(y / b)
        if (g.need[0]) {
          g.grad_inputs[0] =
              zip(g.grad, *g.inputs[1], [](auto gv, auto b) { return gv / cj(b); });
        }
        if (g.need[1]) {
          Tensor ratio = zip(g.output, *g.inputs[1], [](auto y, auto b) { return y / b; });
          g.grad_inputs[1] =
              zip(g.grad, ratio, [](auto gv, auto q) { return -gv * cj(q); });
        }
      });
}

Var scale(const Var& x, double s) {
  return tape_of(x).apply(
      "scale", {x},
      [s](std::span<const Tensor* const> in) {
        return map(*in[0], [s](auto v) { return v * s; });
      },
      [s](const BackwardArgs& g) {
        g.grad_inputs[0] = map(g.grad, [s](auto v) { return v * s; });
      });
}

Var scale(const Var& x, cplx s) {
  return tape_of(x).apply(
      "scale", {x},
      [s](std::span<const Tensor* const> in) {
        require_complex("scale", *in[0]);
        return map(*in[0], [s](auto v) { return v * s; });
      },
      [s](const BackwardArgs& g) {
        const cplx c = std::conj(s);
        g.grad_inputs[0] = map(g.grad, [c](auto v) { return v * c; });
      });
}

Var axis_matmul(const Var& a, const Var& x, std::size_t axis) {
  auto check = [axis](const Tensor& A, const Tensor& X) {
    if (A.rank() != 2 || axis >= X.rank() || A.dim(1) != X.dim(axis) ||
        A.dtype() != X.dtype()) {
      throw ShapeError("axis_matmul: matrix " + shape_str(A.shape()) + " " +
                       dtype_str(A.dtype()) + " cannot contract axis " +
                       std::to_string(axis) + " of " + shape_str(X.shape()) + " " +
                       dtype_str(X.dtype()));
    }
  };
  return tape_of(a).apply(
      "axis_matmul", {a, x},
      [axis, check](std::span<const Tensor* const> in) {
        const Tensor& A = *in[0];
        const Tensor& X = *in[1];
        check(A, X);
        Shape out_shape = X.shape();
        out_shape[axis] = A.dim(0);
        Tensor y = Tensor::zeros(out_shape, X.dtype());
        const AxisView v = axis_view(X.shape(), axis);
        if (X.is_complex()) {
          axis_matmul_fwd<cplx>(A.cvalues(), X.cvalues(), y.cvalues(), A.dim(0), v);
        } else {
          axis_matmul_fwd<double>(A.values(), X.values(), y.values(), A.dim(0), v);
        }
        return y;
      },
      [axis](const BackwardArgs& g) {
        const Tensor& A = *g.inputs[0];
        const Tensor& X = *g.inputs[1];
        const AxisView v = axis_view(X.shape(), axis);
        const std::size_t m = A.dim(0);
        if (g.need[0]) {
          Tensor ga = Tensor::zeros(A.shape(), A.dtype());
          if (X.is_complex()) {
            axis_matmul_bwd_a<cplx>(X.cvalues(), g.grad.cvalues(), ga.cvalues(), m, v);
          } else {
            axis_matmul_bwd_a<double>(X.values(), g.grad.values(), ga.values(), m, v);
          }
          g.grad_inputs[0] = std::move(ga);
        }
        if (g.need[1]) {
          Tensor gx = Tensor::zeros(X.shape(), X.dtype());
          if (X.is_complex()) {
            axis_matmul_bwd_x<cplx>(A.cvalues(), g.grad.cvalues(), gx.cvalues(), m, v);
          } else {
            axis_matmul_bwd_x<double>(A.values(), g.grad.values(), gx.values(), m, v);
          }
          g.grad_inputs[1] = std::move(gx);
        }
      });
}

Var matmul(const Var& a, const Var& b) {
  if (a.value().rank() != 2 || b.value().rank() != 2) {
    shape_fail("matmul", a.value(), b.value());
  }
  return axis_matmul(a, b, 0);
}

namespace {

template <class T>
void mode_mix_fwd(std::span<const T> R, std::span<const T> Z, std::span<T> Y,
                  std::size_t O, std::size_t I, std::size_t K) {
  for (std::size_t o = 0; o < O; ++o) {
    T* yo = Y.data() + o * K;
    for (std::size_t i = 0; i < I; ++i) {
      const T* r = R.data() + (o * I + i) * K;
      const T* z = Z.data() + i * K;
      for (std::size_t k = 0; k < K; ++k) yo[k] += r[k] * z[k];
    }
  }
}

}  // namespace

Var mode_mix(const Var& r, const Var& z) {
  auto check = [](const Tensor& R, const Tensor& Z) {
    if (R.rank() != 4 || Z.rank() != 3 || R.dim(1) != Z.dim(0) ||
        R.dim(2) != Z.dim(1) || R.dim(3) != Z.dim(2) || R.dtype() != Z.dtype()) {
      shape_fail("mode_mix", R, Z);
    }
  };
  return tape_of(r).apply(
      "mode_mix", {r, z},
      [check](std::span<const Tensor* const> in) {
        const Tensor& R = *in[0];
        const Tensor& Z = *in[1];
        check(R, Z);
        const std::size_t O = R.dim(0), I = R.dim(1), K = R.dim(2) * R.dim(3);
        Tensor y = Tensor::zeros({O, R.dim(2), R.dim(3)}, Z.dtype());
        if (Z.is_complex()) {
          mode_mix_fwd<cplx>(R.cvalues(), Z.cvalues(), y.cvalues(), O, I, K);
        } else {
          mode_mix_fwd<double>(R.values(), Z.values(), y.values(), O, I, K);
        }
        return y;
      },
      [](const BackwardArgs& g) {
        const Tensor& R = *g.inputs[0];
        const Tensor& Z = *g.inputs[1];
        const std::size_t O = R.dim(0), I = R.dim(1), K = R.dim(2) * R.dim(3);
        auto run = [&]<class T>(T) {
          auto r = view<T>(R);
          auto z = view<T>(Z);
          auto gy = view<T>(g.grad);
          if (g.need[0]) {
            Tensor gr = Tensor::zeros(R.shape(), R.dtype());
            auto out = view_mut<T>(gr);
            for (std::size_t o = 0; o < O; ++o) {
              for (std::size_t i = 0; i < I; ++i) {
                T* dst = out.data() + (o * I + i) * K;
                const T* go = gy.data() + o * K;
                const T* zi = z.data() + i * K;
                for (std::size_t k = 0; k < K; ++k) dst[k] = go[k] * cj(zi[k]);
              }
            }
            g.grad_inputs[0] = std::move(gr);
          }
          if (g.need[1]) {
            Tensor gz = Tensor::zeros(Z.shape(), Z.dtype());
            auto out = view_mut<T>(gz);
            for (std::size_t o = 0; o < O; ++o) {
              const T* go = gy.data() + o * K;
              for (std::size_t i = 0; i < I; ++i) {
                const T* ri = r.data() + (o * I + i) * K;
                T* dst = out.data() + i * K;
                for (std::size_t k = 0; k < K; ++k) dst[k] += cj(ri[k]) * go[k];
              }
            }
            g.grad_inputs[1] = std::move(gz);
          }
        };
        if (Z.is_complex()) {
          run(cplx{});
        } else {
          run(0.0);
        }
      });
}

namespace {

Tensor transpose2d(const Tensor& x) {
  const std::size_t r = x.dim(0), c = x.dim(1);
  Tensor y = Tensor::zeros({c, r}, x.dtype());
  auto run = [&]<class T>(T) {
    auto src = view<T>(x);
    auto dst = view_mut<T>(y);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) dst[j * r + i] = src[i * c + j];
  };
  if (x.is_complex()) {
    run(cplx{});
  } else {
    run(0.0);
  }
  return y;
}

}  // namespace

Var transpose(const Var& x) {
  return tape_of(x).apply(
      "transpose", {x},
      [](std::span<const Tensor* const> in) {
        if (in[0]->rank() != 2) {
          throw ShapeError("transpose: expects a 2-D tensor, got " +
                           shape_str(in[0]->shape()));
        }
        return transpose2d(*in[0]);
      },
      [](const BackwardArgs& g) { g.grad_inputs[0] = transpose2d(g.grad); });
}

Var concat(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat: no operands");
  return tape_of(parts.front()).apply(
      "concat", parts,
      [](std::span<const Tensor* const> in) {
        const Tensor& first = *in[0];
        if (first.rank() == 0) throw ShapeError("concat: scalar operand");
        Shape out_shape = first.shape();
        out_shape[0] = 0;
        for (const Tensor* t : in) {
          Shape s = t->shape();
          if (s.size() != first.rank() || t->dtype() != first.dtype() ||
              !std::equal(s.begin() + 1, s.end(), first.shape().begin() + 1)) {
            shape_fail("concat", first, *t);
          }
          out_shape[0] += s[0];
        }
        Tensor y = Tensor::zeros(out_shape, first.dtype());
        std::size_t offset = 0;
        for (const Tensor* t : in) {
          if (t->is_complex()) {
            std::copy(t->cvalues().begin(), t->cvalues().end(),
                      y.cvalues().begin() + offset);
          } else {
            std::copy(t->values().begin(), t->values().end(),
                      y.values().begin() + offset);
          }
          offset += t->size();
        }
        return y;
      },
      [](const BackwardArgs& g) {
        std::size_t offset = 0;
        for (std::size_t i = 0; i < g.inputs.size(); ++i) {
          const Tensor& t = *g.inputs[i];
          if (g.need[i]) {
            Tensor part = Tensor::zeros(t.shape(), t.dtype());
            if (t.is_complex()) {
              auto src = g.grad.cvalues().subspan(offset, t.size());
              std::copy(src.begin(), src.end(), part.cvalues().begin());
            } else {
              auto src = g.grad.values().subspan(offset, t.size());
              std::copy(src.begin(), src.end(), part.values().begin());
            }
            g.grad_inputs[i] = std::move(part);
          }
          offset += t.size();
        }
      });
}

Var slice(const Var& x, std::size_t begin, std::size_t end) {
  return tape_of(x).apply(
      "slice", {x},
      [begin, end](std::span<const Tensor* const> in) {
        const Tensor& t = *in[0];
        if (t.rank() == 0 || begin >= end || end > t.dim(0)) {
          throw ShapeError("slice: range [" + std::to_string(begin) + ", " +
                           std::to_string(end) + ") invalid for " + shape_str(t.shape()));
        }
        Shape s = t.shape();
        const std::size_t row = t.size() / s[0];
        s[0] = end - begin;
        Tensor y = Tensor::zeros(s, t.dtype());
        if (t.is_complex()) {
          auto src = t.cvalues().subspan(begin * row, (end - begin) * row);
          std::copy(src.begin(), src.end(), y.cvalues().begin());
        } else {
          auto src = t.values().subspan(begin * row, (end - begin) * row);
          std::copy(src.begin(), src.end(), y.values().begin());
        }
        return y;
      },
      [begin](const BackwardArgs& g) {
        const Tensor& t = *g.inputs[0];
        const std::size_t row = t.size() / t.dim(0);
        Tensor gx = Tensor::zeros(t.shape(), t.dtype());
        if (t.is_complex()) {
          std::copy(g.grad.cvalues().begin(), g.grad.cvalues().end(),
                    gx.cvalues().begin() + begin * row);
        } else {
          std::copy(g.grad.values().begin(), g.grad.values().end(),
                    gx.values().begin() + begin * row);
        }
        g.grad_inputs[0] = std::move(gx);
      });
}

Var add_channel_bias(const Var& x, const Var& b) {
  return tape_of(x).apply(
      "add_channel_bias", {x, b},
      [](std::span<const Tensor* const> in) {
        const Tensor& X = *in[0];
        const Tensor& B = *in[1];
        if (X.rank() < 1 || B.rank() != 1 || B.dim(0) != X.dim(0) ||
            B.dtype() != X.dtype()) {
          shape_fail("add_channel_bias", X, B);
        }
        Tensor y = X;
        const std::size_t C = X.dim(0), inner = X.size() / C;
        auto run = [&]<class T>(T) {
          auto dst = view_mut<T>(y);
          auto bias = view<T>(B);
          for (std::size_t c = 0; c < C; ++c)
            for (std::size_t j = 0; j < inner; ++j) dst[c * inner + j] += bias[c];
        };
        if (X.is_complex()) {
          run(cplx{});
        } else {
          run(0.0);
        }
        return y;
      },
      [](const BackwardArgs& g) {
        if (g.need[0]) g.grad_inputs[0] = g.grad;
        if (g.need[1]) {
          const Tensor& B = *g.inputs[1];
          const std::size_t C = B.dim(0), inner = g.grad.size() / C;
          Tensor gb = Tensor::zeros(B.shape(), B.dtype());
          auto run = [&]<class T>(T) {
            auto src = view<T>(g.grad);
            auto dst = view_mut<T>(gb);
            for (std::size_t c = 0; c < C; ++c) {
              T acc{};
              for (std::size_t j = 0; j < inner; ++j) acc += src[c * inner + j];
              dst[c] = acc;
            }
          };
          if (B.is_complex()) {
            run(cplx{});
          } else {
            run(0.0);
          }
          g.grad_inputs[1] = std::move(gb);
        }
      });
}

namespace {

// Interleaved re/im view, so split activations treat both dtypes alike.
std::span<const double> raw(const Tensor& t) {
  if (!t.is_complex()) return t.values();
  auto c = t.cvalues();
  return {reinterpret_cast<const double*>(c.data()), 2 * c.size()};
}

Tensor from_raw(const Tensor& like, std::vector<double> v) {
  if (!like.is_complex()) return Tensor::unchecked_real(like.shape(), std::move(v));
  std::vector<cplx> c(v.size() / 2);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = cplx(v[2 * i], v[2 * i + 1]);
  return Tensor::unchecked_complex(like.shape(), std::move(c));
}

}  // namespace

Var relu(const Var& x) {
  return tape_of(x).apply(
      "relu", {x},
      [](std::span<const Tensor* const> in) {
        auto xv = raw(*in[0]);
        std::vector<double> y(xv.size());
        for (std::size_t i = 0; i < xv.size(); ++i) y[i] = xv[i] > 0.0 ? xv[i] : 0.0;
        return from_raw(*in[0], std::move(y));
      },
      [](const BackwardArgs& g) {
        auto gv = raw(g.grad);
        auto xv = raw(*g.inputs[0]);
        std::vector<double> gx(gv.size());
        for (std::size_t i = 0; i < gv.size(); ++i) gx[i] = xv[i] > 0.0 ? gv[i] : 0.0;
        g.grad_inputs[0] = from_raw(g.grad, std::move(gx));
      });
}

Var gelu(const Var& x) {
  Tape& tape = tape_of(x);
  // The slope is filled by the forward pass when a backward pass can follow,
  // which saves re-evaluating erf there.
  auto slope = tape.recording() ? std::make_shared<std::vector<double>>() : nullptr;
  return tape.apply(
      "gelu", {x},
      [slope](std::span<const Tensor* const> in) {
        auto xv = raw(*in[0]);
        std::vector<double> y(xv.size());
        if (slope) slope->resize(xv.size());
        for (std::size_t i = 0; i < xv.size(); ++i) {
          const double v = xv[i];
          const double cdf = 0.5 * (1.0 + std::erf(v * std::numbers::sqrt2 / 2.0));
          y[i] = v * cdf;
          if (slope) {
            (*slope)[i] = cdf + v * std::exp(-0.5 * v * v) / std::sqrt(2.0 * std::numbers::pi);
          }
        }
        return from_raw(*in[0], std::move(y));
      },
      [slope](const BackwardArgs& g) {
        auto gv = raw(g.grad);
        std::vector<double> gx(gv.size());
        for (std::size_t i = 0; i < gv.size(); ++i) gx[i] = gv[i] * (*slope)[i];
        g.grad_inputs[0] = from_raw(g.grad, std::move(gx));
      });
}

Var sqrt(const Var& x) {
  return tape_of(x).apply(
      "sqrt", {x},
      [](std::span<const Tensor* const> in) {
        require_real("sqrt", *in[0]);
        for (double v : in[0]->values()) {
          if (v < 0.0) throw NumericError("sqrt: negative operand");
        }
        return map(*in[0], [](double v) { return std::sqrt(v); });
      },
      [](const BackwardArgs& g) {
        g.grad_inputs[0] =
            zip(g.grad, g.output, [](double gv, double y) {
              // Subgradient 0 at the kink of sqrt at zero.
              return y > 0.0 ? gv / (2.0 * y) : 0.0;
            });
      });
}

Var complex(const Var& re, const Var& im) {
  return tape_of(re).apply(
      "complex", {re, im},
      [](std::span<const Tensor* const> in) {
        require_real("complex", *in[0]);
        require_same("complex", *in[0], *in[1]);
        auto a = in[0]->values();
        auto b = in[1]->values();
        std::vector<cplx> out(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) out[i] = cplx(a[i], b[i]);
        return Tensor::unchecked_complex(in[0]->shape(), std::move(out));
      },
      [](const BackwardArgs& g) {
        auto gz = g.grad.cvalues();
        if (g.need[0]) {
          std::vector<double> out(gz.size());
          for (std::size_t i = 0; i < gz.size(); ++i) out[i] = gz[i].real();
          g.grad_inputs[0] = Tensor::unchecked_real(g.grad.shape(), std::move(out));
        }
        if (g.need[1]) {
          std::vector<double> out(gz.size());
          for (std::size_t i = 0; i < gz.size(); ++i) out[i] = gz[i].imag();
          g.grad_inputs[1] = Tensor::unchecked_real(g.grad.shape(), std::move(out));
        }
      });
}

Var complex_from_real(const Var& re) {
  return tape_of(re).apply(
      "complex_from_real", {re},
      [](std::span<const Tensor* const> in) {
        require_real("complex_from_real", *in[0]);
        return to_complex(*in[0]);
      },
      [](const BackwardArgs& g) {
        auto gz = g.grad.cvalues();
        std::vector<double> out(gz.size());
        for (std::size_t i = 0; i < gz.size(); ++i) out[i] = gz[i].real();
        g.grad_inputs[0] = Tensor::unchecked_real(g.grad.shape(), std::move(out));
      });
}

Var real_part(const Var& z) {
  return tape_of(z).apply(
      "real_part", {z},
      [](std::span<const Tensor* const> in) {
        require_complex("real_part", *in[0]);
        auto v = in[0]->cvalues();
        std::vector<double> out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i].real();
        return Tensor::unchecked_real(in[0]->shape(), std::move(out));
      },
      [](const BackwardArgs& g) { g.grad_inputs[0] = to_complex(g.grad); });
}

Var imag_part(const Var& z) {
  return tape_of(z).apply(
      "imag_part", {z},
      [](std::span<const Tensor* const> in) {
        require_complex("imag_part", *in[0]);
        auto v = in[0]->cvalues();
        std::vector<double> out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i].imag();
        return Tensor::unchecked_real(in[0]->shape(), std::move(out));
      },
      [](const BackwardArgs& g) {
        auto gv = g.grad.values();
        std::vector<cplx> out(gv.size());
        for (std::size_t i = 0; i < gv.size(); ++i) out[i] = cplx(0.0, gv[i]);
        g.grad_inputs[0] = Tensor::unchecked_complex(g.grad.shape(), std::move(out));
      });
}

Var conj(const Var& z) {
  return tape_of(z).apply(
      "conj", {z},
      [](std::span<const Tensor* const> in) {
        require_complex("conj", *in[0]);
        return map(*in[0], [](auto v) { return cj(v); });
      },
      [](const BackwardArgs& g) {
        g.grad_inputs[0] = map(g.grad, [](auto v) { return cj(v); });
      });
}

Var abs(const Var& x) {
  return tape_of(x).apply(
      "abs", {x},
      [](std::span<const Tensor* const> in) {
        const Tensor& t = *in[0];
        std::vector<double> out(t.size());
        if (t.is_complex()) {
          auto v = t.cvalues();
          for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::abs(v[i]);
        } else {
          auto v = t.values();
          for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::abs(v[i]);
        }
        return Tensor::unchecked_real(t.shape(), std::move(out));
      },
      [](const BackwardArgs& g) {
        const Tensor& t = *g.inputs[0];
        auto gv = g.grad.values();
        auto y = g.output.values();
        if (t.is_complex()) {
          auto v = t.cvalues();
          std::vector<cplx> out(v.size());
          for (std::size_t i = 0; i < v.size(); ++i)
            out[i] = y[i] > 0.0 ? gv[i] * v[i] / y[i] : cplx{};
          g.grad_inputs[0] = Tensor::unchecked_complex(t.shape(), std::move(out));
        } else {
          auto v = t.values();
          std::vector<double> out(v.size());
          for (std::size_t i = 0; i < v.size(); ++i)
            out[i] = v[i] > 0.0 ? gv[i] : (v[i] < 0.0 ? -gv[i] : 0.0);
          g.grad_inputs[0] = Tensor::unchecked_real(t.shape(), std::move(out));
        }
      });
}

Var reduce_sum(const Var& x) {
  return tape_of(x).apply(
      "reduce_sum", {x},
      [](std::span<const Tensor* const> in) {
        const Tensor& t = *in[0];
        if (t.is_complex()) {
          cplx s{};
          for (const cplx& v : t.cvalues()) s += v;
          return Tensor::scalar(s);
        }
        double s = 0.0;
        for (double v : t.values()) s += v;
        return Tensor::scalar(s);
      },
      [](const BackwardArgs& g) {
        const Tensor& t = *g.inputs[0];
        Tensor gx = Tensor::zeros(t.shape(), t.dtype());
        if (t.is_complex()) {
          std::fill(gx.cvalues().begin(), gx.cvalues().end(), g.grad.citem());
        } else {
          std::fill(gx.values().begin(), gx.values().end(), g.grad.item());
        }
        g.grad_inputs[0] = std::move(gx);
      });
}

Var reduce_mean(const Var& x) {
  const double n = static_cast<double>(x.value().size());
  return scale(reduce_sum(x), 1.0 / n);
}

}  // namespace aeroop::ops
