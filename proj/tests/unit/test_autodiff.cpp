// Copyright 2026 The aeroop Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "aeroop/autodiff.hpp"
#include "aeroop/error.hpp"
#include "aeroop/ops.hpp"
#include "test_util.hpp"

using namespace aeroop;
using testutil::Gen;

namespace {

Var sum_sq(const Var& x) {
  // Real scalar from either dtype: sum |x|^2.
  Var a = ops::abs(x);
  return ops::reduce_sum(ops::mul(a, a));
}

}  // namespace

TEST(Tensor, ConstructionChecks) {
  EXPECT_THROW(Tensor::real({2, 2}, {1.0, 2.0, 3.0}), ShapeError);
  EXPECT_THROW(Tensor::real({1}, {std::nan("")}), NumericError);
  EXPECT_THROW(Tensor::complex({1}, {cplx(0.0, std::numeric_limits<double>::infinity())}),
               NumericError);
  Tensor t = Tensor::real({2, 3}, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(t.rank(), 2u);
  EXPECT_EQ(t.size(), 6u);
  EXPECT_THROW(t.reshaped({4}), ShapeError);
  EXPECT_EQ(t.reshaped({3, 2}).values()[5], 6.0);
  EXPECT_TRUE(t.bit_equal(Tensor::real({2, 3}, {1, 2, 3, 4, 5, 6})));
  EXPECT_FALSE(t.bit_equal(t.reshaped({3, 2})));
}

TEST(Tensor, NegativeZeroIsNotBitEqual) {
  EXPECT_FALSE(Tensor::scalar(0.0).bit_equal(Tensor::scalar(-0.0)));
}

TEST(Autodiff, SquareValueAndGradient) {
  Tape tape;
  Var x = tape.parameter(Tensor::scalar(3.0));
  Var y = ops::mul(x, x);
  EXPECT_EQ(y.value().item(), 9.0);
  EXPECT_EQ(tape.backward(y)[x].item(), 6.0);
}

TEST(Autodiff, AdditiveIdentity) {
  Tape tape;
  Var x = tape.constant(Tensor::zeros({4}));
  EXPECT_TRUE(ops::add(x, x).value().bit_equal(Tensor::zeros({4})));
}

TEST(Autodiff, RecordedMatmulEqualsEager) {
  Gen g(11);
  Tensor a = g.complex({3, 3}), b = g.complex({3, 3});
  Tape tape;
  Var y = ops::matmul(tape.parameter(a), tape.parameter(b));
  double err = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      cplx acc = 0.0;
      for (std::size_t k = 0; k < 3; ++k) acc += a.cvalues()[i * 3 + k] * b.cvalues()[k * 3 + j];
      err = std::max(err, std::abs(acc - y.value().cvalues()[i * 3 + j]));
    }
  }
  EXPECT_LT(err, 1e-15);
}

TEST(Autodiff, ComplexQuadraticDescends) {
  Tape tape;
  Var x = tape.parameter(Tensor::complex({1}, {cplx(1.0, 2.0)}));
  Var loss = sum_sq(x);
  const cplx g = tape.backward(loss)[x].cvalues()[0];
  // d|z|^2/dre + i d|z|^2/dim = 2z.
  EXPECT_NEAR(g.real(), 2.0, 1e-12);
  EXPECT_NEAR(g.imag(), 4.0, 1e-12);
  const cplx z = cplx(1.0, 2.0) - 1e-3 * g;
  EXPECT_LT(std::norm(z), 5.0);
}

TEST(Autodiff, PrimitiveExamples) {
  Tape tape;
  Var z = tape.constant(Tensor::complex({1}, {cplx(2.0, 3.0)}));
  EXPECT_EQ(ops::real_part(z).value().values()[0], 2.0);
  EXPECT_EQ(ops::imag_part(z).value().values()[0], 3.0);
  EXPECT_EQ(ops::reduce_sum(tape.constant(Tensor::full({5}, 1.0))).value().item(), 5.0);
  EXPECT_EQ(ops::reduce_mean(tape.constant(Tensor::full({5}, 2.0))).value().item(), 2.0);
}

TEST(Autodiff, ShapeAndDtypeMismatchesThrow) {
  Tape tape;
  Var a = tape.constant(Tensor::zeros({2}));
  Var b = tape.constant(Tensor::zeros({3}));
  Var c = tape.constant(Tensor::zeros({2}, DType::kComplex128));
  EXPECT_THROW(ops::add(a, b), ShapeError);
  EXPECT_THROW(ops::add(a, c), ShapeError);
  EXPECT_THROW(ops::matmul(a, a), ShapeError);
  Tape other;
  Var d = other.constant(Tensor::zeros({2}));
  EXPECT_THROW(ops::add(a, d), Error);
}

TEST(Autodiff, NonFiniteOutputIsRejected) {
  Tape tape;
  Var a = tape.constant(Tensor::scalar(1.0));
  Var z = tape.constant(Tensor::scalar(0.0));
  EXPECT_THROW(ops::div(a, z), NumericError);
  EXPECT_THROW(ops::sqrt(tape.constant(Tensor::scalar(-1.0))), NumericError);
}

// One case per primitive: the loss reduces the primitive's output to a real
// scalar through a fixed random projection so every output entry matters.
struct PrimitiveCase {
  std::string name;
  std::vector<std::pair<std::string, Tensor>> inputs;
  std::function<Var(const std::vector<Var>&)> apply;
};

class PrimitiveGradient : public ::testing::TestWithParam<int> {};

std::vector<PrimitiveCase> primitive_cases(Gen& g) {
  auto r = [&](Shape s) { return g.real(std::move(s)); };
  auto c = [&](Shape s) { return g.complex(std::move(s)); };
  auto pos = [&](Shape s) { return g.real(std::move(s), 0.5, 1.5); };
  std::vector<PrimitiveCase> cases;
  using V = const std::vector<Var>&;
  cases.push_back({"add.real", {{"a", r({3, 2})}, {"b", r({3, 2})}},
                   [](V v) { return ops::add(v[0], v[1]); }});
  cases.push_back({"add.complex", {{"a", c({4})}, {"b", c({4})}},
                   [](V v) { return ops::add(v[0], v[1]); }});
  cases.push_back({"sub.complex", {{"a", c({4})}, {"b", c({4})}},
                   [](V v) { return ops::sub(v[0], v[1]); }});
  cases.push_back({"mul.real", {{"a", r({5})}, {"b", r({5})}},
                   [](V v) { return ops::mul(v[0], v[1]); }});
  cases.push_back({"mul.complex", {{"a", c({5})}, {"b", c({5})}},
                   [](V v) { return ops::mul(v[0], v[1]); }});
  cases.push_back({"div.real", {{"a", r({4})}, {"b", pos({4})}},
                   [](V v) { return ops::div(v[0], v[1]); }});
  cases.push_back({"div.complex",
                   {{"a", c({4})}, {"b", Tensor::complex({4}, {cplx(1, .5), cplx(-1, 1),
                                                                cplx(.7, -.9), cplx(2, 0)})}},
                   [](V v) { return ops::div(v[0], v[1]); }});
  cases.push_back({"scale.real", {{"a", r({3})}}, [](V v) { return ops::scale(v[0], -1.7); }});
  cases.push_back({"scale.complex", {{"a", c({3})}},
                   [](V v) { return ops::scale(v[0], cplx(0.3, -1.1)); }});
  cases.push_back({"matmul.real", {{"a", r({3, 4})}, {"b", r({4, 2})}},
                   [](V v) { return ops::matmul(v[0], v[1]); }});
  cases.push_back({"matmul.complex", {{"a", c({3, 4})}, {"b", c({4, 2})}},
                   [](V v) { return ops::matmul(v[0], v[1]); }});
  for (std::size_t axis = 0; axis < 3; ++axis) {
    Shape xs{3, 4, 5};
    const std::size_t n = xs[axis];
    cases.push_back({"axis_matmul.complex" + std::to_string(axis),
                     {{"A", c({2, n})}, {"x", c(xs)}},
                     [axis](V v) { return ops::axis_matmul(v[0], v[1], axis); }});
    cases.push_back({"axis_matmul.real" + std::to_string(axis),
                     {{"A", r({2, n})}, {"x", r(xs)}},
                     [axis](V v) { return ops::axis_matmul(v[0], v[1], axis); }});
  }
  cases.push_back({"mode_mix", {{"R", c({3, 2, 4, 3})}, {"z", c({2, 4, 3})}},
                   [](V v) { return ops::mode_mix(v[0], v[1]); }});
  cases.push_back({"transpose", {{"a", c({2, 5})}}, [](V v) { return ops::transpose(v[0]); }});
  cases.push_back({"concat", {{"a", r({2, 3})}, {"b", r({1, 3})}, {"c", r({3, 3})}},
                   [](V v) { return ops::concat({v[0], v[1], v[2]}); }});
  cases.push_back({"slice", {{"a", c({5, 2})}}, [](V v) { return ops::slice(v[0], 1, 4); }});
  cases.push_back({"add_channel_bias", {{"x", c({3, 2, 2})}, {"b", c({3})}},
                   [](V v) { return ops::add_channel_bias(v[0], v[1]); }});
  cases.push_back({"relu.real", {{"a", r({8})}}, [](V v) { return ops::relu(v[0]); }});
  cases.push_back({"relu.complex", {{"a", c({8})}}, [](V v) { return ops::relu(v[0]); }});
  cases.push_back({"gelu.real", {{"a", r({8})}}, [](V v) { return ops::gelu(v[0]); }});
  cases.push_back({"gelu.complex", {{"a", c({8})}}, [](V v) { return ops::gelu(v[0]); }});
  cases.push_back({"sqrt", {{"a", pos({6})}}, [](V v) { return ops::sqrt(v[0]); }});
  cases.push_back({"complex", {{"re", r({4})}, {"im", r({4})}},
                   [](V v) { return ops::complex(v[0], v[1]); }});
  cases.push_back({"complex_from_real", {{"re", r({4})}},
                   [](V v) { return ops::complex_from_real(v[0]); }});
  cases.push_back({"real_part", {{"z", c({4})}}, [](V v) { return ops::real_part(v[0]); }});
  cases.push_back({"imag_part", {{"z", c({4})}}, [](V v) { return ops::imag_part(v[0]); }});
  cases.push_back({"conj", {{"z", c({4})}}, [](V v) { return ops::conj(v[0]); }});
  cases.push_back({"abs.real", {{"a", r({6})}}, [](V v) { return ops::abs(v[0]); }});
  cases.push_back({"abs.complex", {{"z", c({6})}}, [](V v) { return ops::abs(v[0]); }});
  cases.push_back({"reduce_sum", {{"z", c({3, 2})}}, [](V v) { return ops::reduce_sum(v[0]); }});
  cases.push_back({"reduce_mean", {{"a", r({3, 2})}},
                   [](V v) { return ops::reduce_mean(v[0]); }});
  return cases;
}

constexpr int kPrimitiveCases = 36;

TEST(Autodiff, PrimitiveCaseCount) {
  Gen g(1);
  EXPECT_EQ(static_cast<int>(primitive_cases(g).size()), kPrimitiveCases);
}

TEST_P(PrimitiveGradient, MatchesCentralDifferences) {
  Gen g(100 + GetParam());
  auto cases = primitive_cases(g);
  const PrimitiveCase& pc = cases.at(GetParam());
  // Fixed random real weights that turn the output into a scalar.
  Tape probe(false);
  std::vector<Var> probe_in;
  for (const auto& in : pc.inputs) probe_in.push_back(probe.constant(in.second));
  const Tensor out = pc.apply(probe_in).value();
  const Tensor w_re = g.real(out.shape()), w_im = g.real(out.shape());
  auto loss = [&](Tape& tape, const std::vector<Var>& v) {
    Var y = pc.apply(v);
    if (y.is_complex()) {
      return ops::add(ops::reduce_sum(ops::mul(ops::real_part(y), tape.constant(w_re))),
                      ops::reduce_sum(ops::mul(ops::imag_part(y), tape.constant(w_im))));
    }
    return ops::reduce_sum(ops::mul(y, tape.constant(w_re)));
  };
  const auto report = testutil::gradient_check(pc.inputs, loss);
  EXPECT_LT(report.max_rel, 1e-6) << pc.name << " worst input " << report.worst;
}

INSTANTIATE_TEST_SUITE_P(All, PrimitiveGradient, ::testing::Range(0, kPrimitiveCases));

TEST(Autodiff, TwoLayerNetworkGradient) {
  Gen g(7);
  std::vector<std::pair<std::string, Tensor>> params{
      {"w1", g.real({6, 3})}, {"b1", g.real({6})}, {"w2", g.real({1, 6})}, {"b2", g.real({1})}};
  const Tensor x = g.real({3, 10});
  const Tensor y = g.real({1, 10});
  auto loss = [&](Tape& tape, const std::vector<Var>& p) {
    Var h = ops::gelu(ops::add_channel_bias(ops::matmul(p[0], tape.constant(x)), p[1]));
    Var out = ops::add_channel_bias(ops::matmul(p[2], h), p[3]);
    Var d = ops::sub(out, tape.constant(y));
    return ops::reduce_mean(ops::mul(d, d));
  };
  const auto report = testutil::gradient_check(params, loss);
  EXPECT_LT(report.max_rel, 1e-6) << report.worst;
}

// Property: backward is linear in the seed, for random graphs.
TEST(AutodiffProperty, BackwardLinearInSeed) {
  Gen g(21);
  for (int trial = 0; trial < 30; ++trial) {
    Tape tape;
    Var x = tape.parameter(g.complex({4, 3}));
    Var m = tape.parameter(g.complex({2, 4}));
    Var y = ops::gelu(ops::matmul(m, x));
    if (g.coin()) y = ops::mul(y, ops::conj(y));
    const Tensor seed = g.complex(y.shape());
    const double a = g.uniform(-3.0, 3.0);
    Tensor scaled = seed;
    for (cplx& z : scaled.cvalues()) z *= a;
    const auto g1 = tape.backward(y, seed);
    const auto g2 = tape.backward(y, scaled);
    for (const Var& v : {x, m}) {
      for (std::size_t i = 0; i < g1[v].size(); ++i) {
        EXPECT_NEAR(std::abs(a * g1[v].cvalues()[i] - g2[v].cvalues()[i]), 0.0,
                    1e-14 * (1.0 + std::abs(g2[v].cvalues()[i])));
      }
    }
  }
}

// Property: re-running the same graph reproduces values and gradients bit for bit.
TEST(AutodiffProperty, ReplayDeterminism) {
  Gen g(5);
  const Tensor a = g.complex({5, 5}), b = g.complex({5, 3});
  auto run = [&](Tensor& value, Tensor& grad) {
    Tape tape;
    Var pa = tape.parameter(a);
    Var pb = tape.parameter(b);
    Var y = ops::reduce_sum(ops::abs(ops::gelu(ops::matmul(pa, pb))));
    tape.verify_replay();
    value = y.value();
    grad = tape.backward(y)[pa];
  };
  Tensor v1, g1, v2, g2;
  run(v1, g1);
  run(v2, g2);
  EXPECT_TRUE(v1.bit_equal(v2));
  EXPECT_TRUE(g1.bit_equal(g2));
}

TEST(Autodiff, InferenceTapeRecordsNothing) {
  Tape tape(false);
  Var x = tape.constant(Tensor::scalar(2.0));
  Var y = ops::mul(x, x);
  EXPECT_EQ(y.value().item(), 4.0);
  EXPECT_EQ(tape.size(), 0u);
  EXPECT_THROW(tape.backward(y), Error);
}

TEST(Autodiff, UnusedParameterGetsZeroGradient) {
  Tape tape;
  Var x = tape.parameter(Tensor::scalar(1.0));
  Var unused = tape.parameter(Tensor::real({3}, {1, 2, 3}));
  const auto grads = tape.backward(ops::mul(x, x));
  EXPECT_TRUE(grads[unused].bit_equal(Tensor::zeros({3})));
}
