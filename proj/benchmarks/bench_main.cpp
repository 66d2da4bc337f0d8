// Copyright 2026 The aeroop Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "aeroop/data.hpp"
#include "aeroop/frft.hpp"
#include "aeroop/model.hpp"
#include "aeroop/synth.hpp"
#include "aeroop/training.hpp"

using namespace aeroop;

namespace {

std::vector<cplx> random_signal(std::size_t n) {
  std::mt19937_64 eng(n);
  std::normal_distribution<double> d;
  std::vector<cplx> x(n);
  for (cplx& z : x) z = cplx(d(eng), d(eng));
  return x;
}

Tensor random_real(Shape shape, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  std::vector<double> v(shape_numel(shape));
  for (double& x : v) x = d(eng);
  return Tensor::real(std::move(shape), std::move(v));
}

ModelConfig desk_model(Flavor flavor) {
  ModelConfig c;
  c.flavor = flavor;
  c.width = 6;
  c.modes = 6;
  c.projection_hidden = 16;
  return c;
}

}  // namespace

static void BM_BuildBasis(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_basis(n));
}
BENCHMARK(BM_BuildBasis)->Arg(32)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_Frft1d(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto basis = dfrft_basis(n);
  const auto x = random_signal(n);
  for (auto _ : state) benchmark::DoNotOptimize(frft_1d(x, 0.7, *basis));
}
BENCHMARK(BM_Frft1d)->Arg(32)->Arg(64)->Arg(256);

static void BM_Fft2d(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = random_signal(n * n);
  const Tensor field = Tensor::complex({n, n}, x);
  for (auto _ : state) benchmark::DoNotOptimize(fft_2d(field));
}
BENCHMARK(BM_Fft2d)->Arg(32)->Arg(64)->Arg(128);

static void BM_LayerForward(benchmark::State& state) {
  const Flavor flavor = state.range(0) == 0 ? Flavor::kFno : Flavor::kCono;
  const OperatorModel model(desk_model(flavor), 32, 32, 1);
  Tensor v = Tensor::zeros({6, 32, 32}, DType::kComplex128);
  for (auto& z : v.cvalues()) z = cplx(0.5, -0.25);
  for (auto _ : state) {
    Tape tape(false);
    BoundModel b(model, tape, false);
    benchmark::DoNotOptimize(b.layer(tape.constant(v), 0).value());
  }
  state.SetLabel(flavor_name(flavor));
}
BENCHMARK(BM_LayerForward)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

static void BM_RolloutLossBackward(benchmark::State& state) {
  const Flavor flavor = state.range(0) == 0 ? Flavor::kFno : Flavor::kCono;
  const OperatorModel model(desk_model(flavor), 32, 32, 2);
  WindowSample sample;
  sample.inputs = random_real({10, 32, 32}, 3);
  sample.targets = random_real({4, 32, 32}, 4);
  for (auto _ : state) {
    Tape tape;
    BoundModel b(model, tape, true);
    const Var loss = rollout_loss(b, sample, 4);
    benchmark::DoNotOptimize(tape.backward(loss));
  }
  state.SetLabel(flavor_name(flavor));
}
BENCHMARK(BM_RolloutLossBackward)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_SynthStep(benchmark::State& state) {
  const SimConfig c = urban_toy_config();
  VelocityProcess vel(c, 5);
  SimState s{std::vector<double>(c.h * c.w, 1.0), 0.0};
  for (auto _ : state) step(s, c, vel.current());
}
BENCHMARK(BM_SynthStep)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
