// Copyright 2026 The aeroop Authors
// SPDX-License-Identifier: Apache-2.0

#include "aeroop/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "aeroop/error.hpp"

namespace aeroop {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

double Source::rate(double t_hours) const {
  // fmod is exact, so the period holds bit-for-bit on representable times.
  return base * (1.0 + amplitude * std::sin(kTwoPi * std::fmod(t_hours + phase, 24.0) / 24.0));
}

void SimConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("sim: " + msg); };
  if (h < 1 || w < 1) fail("grid extents must be positive");
  if (!(dx > 0.0) || !std::isfinite(dx)) fail("dx must be positive");
  if (!(dt > 0.0) || !std::isfinite(dt)) fail("dt must be positive");
  if (substeps < 1) fail("substeps must be >= 1");
  if (!(diffusivity >= 0.0) || !std::isfinite(diffusivity)) fail("diffusivity must be >= 0");
  if (!(decay >= 0.0) || !std::isfinite(decay)) fail("decay must be >= 0");
  if (!(spinup_hours >= 0.0) || !std::isfinite(spinup_hours)) fail("spinup_hours must be >= 0");
  if (std::floor(spinup_hours / dt) * dt != spinup_hours) {
    fail("spinup_hours must be a multiple of dt");
  }
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const Source& s = sources[i];
    const std::string tag = "source " + std::to_string(i) + ": ";
    if (s.row >= h || s.col >= w) fail(tag + "position outside the grid");
    if (!(s.base >= 0.0) || !std::isfinite(s.base)) fail(tag + "base rate must be >= 0");
    if (!(s.amplitude >= 0.0 && s.amplitude <= 1.0)) fail(tag + "amplitude must lie in [0, 1]");
    if (!std::isfinite(s.phase)) fail(tag + "phase must be finite");
  }
  double speed = 0.0;
  if (velocity.kind == VelocityKind::kConstant) {
    if (!std::isfinite(velocity.u) || !std::isfinite(velocity.v)) fail("velocity must be finite");
    speed = std::max(std::abs(velocity.u), std::abs(velocity.v));
  } else {
    if (!(velocity.max_speed >= 0.0) || !std::isfinite(velocity.max_speed)) {
      fail("max_speed must be >= 0");
    }
    if (!(velocity.correlation_hours > 0.0)) fail("correlation_hours must be positive");
    if (velocity.gyre_weight == 0.0 && velocity.random_modes == 0 && velocity.max_speed > 0.0) {
      fail("stream velocity needs a gyre or random modes");
    }
    speed = velocity.max_speed;
  }
  const double courant = speed * dt_sub() / dx;
  const double fourier = diffusivity * dt_sub() / (dx * dx);
  if (courant > 0.5) {
    fail("CFL violation: advective number " + std::to_string(courant) +
         " exceeds 0.5; increase substeps");
  }
  if (fourier > 0.25) {
    fail("CFL violation: diffusive number " + std::to_string(fourier) +
         " exceeds 0.25; increase substeps");
  }
}

double max_face_speed(const FaceVelocity& velocity) {
  double m = 0.0;
  for (double x : velocity.u) m = std::max(m, std::abs(x));
  for (double x : velocity.v) m = std::max(m, std::abs(x));
  return m;
}

VelocityProcess::VelocityProcess(const SimConfig& config, std::uint64_t seed)
    : config_(&config), rng_(Rng::stream("synth-pde", seed)) {
  const VelocityConfig& vc = config.velocity;
  if (vc.kind == VelocityKind::kStream) {
    for (std::size_t m = 0; m < vc.random_modes; ++m) {
      int kx = 0, ky = 0;
      while (kx == 0 && ky == 0) {
        kx = static_cast<int>(rng_.below(5)) - 2;
        ky = static_cast<int>(rng_.below(3));
      }
      kx_.push_back(kx);
      ky_.push_back(ky);
      theta_.push_back(rng_.uniform(0.0, kTwoPi));
      amp_.push_back(rng_.normal());
    }
  }
  rebuild();
}

void VelocityProcess::advance() {
  if (amp_.empty()) return;
  const double rho = std::exp(-config_->dt / config_->velocity.correlation_hours);
  const double kick = std::sqrt(1.0 - rho * rho);
  for (double& a : amp_) a = rho * a + kick * rng_.normal();
  rebuild();
}

void VelocityProcess::rebuild() {
  const SimConfig& c = *config_;
  const VelocityConfig& vc = c.velocity;
  const std::size_t h = c.h, w = c.w;
  field_.u.assign(h * (w + 1), 0.0);
  field_.v.assign((h + 1) * w, 0.0);
  if (vc.kind == VelocityKind::kConstant) {
    std::fill(field_.u.begin(), field_.u.end(), vc.u);
    std::fill(field_.v.begin(), field_.v.end(), vc.v);
    return;
  }
  // Stream function on corners (a, b), a in [0, H], b in [0, W]. Periodic
  // grids evaluate at (a mod H, b mod W) so opposite boundary faces agree
  // exactly.
  const bool periodic = c.boundary == Boundary::kPeriodic;
  std::vector<double> psi((h + 1) * (w + 1));
  for (std::size_t a = 0; a <= h; ++a) {
    for (std::size_t b = 0; b <= w; ++b) {
      const double y = static_cast<double>(periodic ? a % h : a) / static_cast<double>(h);
      const double x = static_cast<double>(periodic ? b % w : b) / static_cast<double>(w);
      double value = vc.gyre_weight * std::sin(kTwoPi * x) * std::sin(kTwoPi * y);
      for (std::size_t m = 0; m < amp_.size(); ++m) {
        value += amp_[m] / std::sqrt(static_cast<double>(amp_.size())) *
                 std::cos(kTwoPi * (kx_[m] * x + ky_[m] * y) + theta_[m]);
      }
      psi[a * (w + 1) + b] = value;
    }
  }
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t b = 0; b <= w; ++b)
      field_.u[i * (w + 1) + b] = (psi[(i + 1) * (w + 1) + b] - psi[i * (w + 1) + b]) / c.dx;
  for (std::size_t a = 0; a <= h; ++a)
    for (std::size_t j = 0; j < w; ++j)
      field_.v[a * w + j] = -(psi[a * (w + 1) + j + 1] - psi[a * (w + 1) + j]) / c.dx;
  const double peak = max_face_speed(field_);
  const double scale = peak > 0.0 ? vc.max_speed / peak : 0.0;
  for (double& x : field_.u) x *= scale;
  for (double& x : field_.v) x *= scale;
}

void step(SimState& state, const SimConfig& config, const FaceVelocity& velocity) {
  const std::size_t h = config.h, w = config.w;
  const double dt = config.dt_sub();
  const double cx = dt / config.dx;
  const bool periodic = config.boundary == Boundary::kPeriodic;
  std::vector<double>& c = state.c;
  if (c.size() != h * w) throw ShapeError("sim: state size does not match the grid");

  // Upwind flux through each face, with zero inflow concentration at open
  // boundaries.
  std::vector<double> flux(std::max(h, w) + 1);
  for (std::size_t i = 0; i < h; ++i) {
    double* row = c.data() + i * w;
    const double* u = velocity.u.data() + i * (w + 1);
    for (std::size_t b = 0; b <= w; ++b) {
      const double left = b > 0 ? row[b - 1] : (periodic ? row[w - 1] : 0.0);
      const double right = b < w ? row[b] : (periodic ? row[0] : 0.0);
      flux[b] = u[b] > 0.0 ? u[b] * left : u[b] * right;
    }
    for (std::size_t j = 0; j < w; ++j) row[j] -= cx * (flux[j + 1] - flux[j]);
  }
  for (std::size_t j = 0; j < w; ++j) {
    for (std::size_t a = 0; a <= h; ++a) {
      const double vel = velocity.v[a * w + j];
      const double below = a > 0 ? c[(a - 1) * w + j] : (periodic ? c[(h - 1) * w + j] : 0.0);
      const double above = a < h ? c[a * w + j] : (periodic ? c[j] : 0.0);
      flux[a] = vel > 0.0 ? vel * below : vel * above;
    }
    for (std::size_t i = 0; i < h; ++i) c[i * w + j] -= cx * (flux[i + 1] - flux[i]);
  }

  const double r = config.diffusivity * dt / (config.dx * config.dx);
  if (r > 0.0) {
    std::vector<double> next(c.size());
    auto at = [&](long i, long j) -> double {
      const auto H = static_cast<long>(h), W = static_cast<long>(w);
      if (periodic) return c[static_cast<std::size_t>(((i + H) % H) * W + (j + W) % W)];
      if (i < 0 || j < 0 || i >= H || j >= W) return 0.0;
      return c[static_cast<std::size_t>(i * W + j)];
    };
    for (long i = 0; i < static_cast<long>(h); ++i) {
      for (long j = 0; j < static_cast<long>(w); ++j) {
        const double centre = c[static_cast<std::size_t>(i) * w + static_cast<std::size_t>(j)];
        next[static_cast<std::size_t>(i) * w + static_cast<std::size_t>(j)] =
            centre + r * (at(i - 1, j) + at(i + 1, j) + at(i, j - 1) + at(i, j + 1) - 4.0 * centre);
      }
    }
    c.swap(next);
  }

  for (const Source& s : config.sources) c[s.row * w + s.col] += s.rate(state.time) * dt;

  if (config.decay > 0.0) {
    const double f = std::exp(-config.decay * dt);
    for (double& x : c) x *= f;
  }
  state.time += dt;
}

namespace {

// Advance `hours` output intervals, updating the velocity at each hour start.
void run_hours(SimState& state, const SimConfig& config, VelocityProcess& velocity,
               std::size_t intervals) {
  for (std::size_t n = 0; n < intervals; ++n) {
    for (std::size_t s = 0; s < config.substeps; ++s) step(state, config, velocity.current());
    velocity.advance();
  }
}

std::size_t spinup_intervals(const SimConfig& config) {
  return static_cast<std::size_t>(std::llround(config.spinup_hours / config.dt));
}

}  // namespace

GridSeries generate(const SimConfig& config, std::size_t hours, std::uint64_t seed) {
  config.validate();
  if (hours < 1) throw ConfigError("sim: hours must be >= 1");
  VelocityProcess velocity(config, seed);
  SimState state;
  state.c.assign(config.h * config.w, 0.0);
  state.time = -config.spinup_hours;
  run_hours(state, config, velocity, spinup_intervals(config));

  GridSeries out;
  out.t = hours;
  out.h = config.h;
  out.w = config.w;
  out.values.resize(hours * config.h * config.w);
  const auto seconds = static_cast<std::int64_t>(std::llround(config.dt * 3600.0));
  for (std::size_t t = 0; t < hours; ++t) {
    if (t > 0) run_hours(state, config, velocity, 1);
    out.timestamps.push_back(config.start_timestamp + static_cast<std::int64_t>(t) * seconds);
    std::transform(state.c.begin(), state.c.end(),
                   out.values.begin() + static_cast<std::ptrdiff_t>(t * config.h * config.w),
                   [](double v) { return static_cast<float>(v); });
  }
  return out;
}

RefineReport refine_check(const SimConfig& config, std::size_t hours, std::uint64_t seed) {
  config.validate();
  auto final_field = [&](std::size_t substeps) {
    SimConfig c = config;
    c.substeps = substeps;
    VelocityProcess velocity(c, seed);
    SimState state;
    state.c.assign(c.h * c.w, 0.0);
    state.time = -c.spinup_hours;
    run_hours(state, c, velocity, spinup_intervals(c) + hours);
    return state.c;
  };
  auto discrepancy = [](const std::vector<double>& coarse, const std::vector<double>& fine) {
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < fine.size(); ++i) {
      diff = std::max(diff, std::abs(coarse[i] - fine[i]));
      scale = std::max(scale, std::abs(fine[i]));
    }
    return scale > 0.0 ? diff / scale : (diff > 0.0 ? 1.0 : 0.0);
  };
  const std::size_t s = config.substeps;
  const auto c1 = final_field(s);
  const auto c2 = final_field(2 * s);
  const auto c4 = final_field(4 * s);
  RefineReport report;
  report.substeps = s;
  report.discrepancy = discrepancy(c1, c2);
  report.discrepancy_fine = discrepancy(c2, c4);
  report.ratio = report.discrepancy_fine > 0.0 ? report.discrepancy / report.discrepancy_fine : 0.0;
  report.passed = report.discrepancy < 0.05;
  return report;
}

SimConfig urban_toy_config() {
  SimConfig c;
  c.h = 32;
  c.w = 32;
  c.dx = 1.0;
  c.dt = 1.0;
  c.substeps = 4;
  c.diffusivity = 0.2;
  c.decay = 0.02;
  c.velocity.kind = VelocityKind::kStream;
  c.velocity.max_speed = 0.5;
  c.velocity.gyre_weight = 1.0;
  c.velocity.random_modes = 4;
  c.velocity.correlation_hours = 48.0;
  c.sources = {
      {8, 9, 10.0, 0.8, 0.0},
      {22, 12, 6.0, 0.6, 6.0},
      {11, 24, 8.0, 0.9, 12.0},
      {25, 26, 5.0, 0.7, 18.0},
  };
  c.boundary = Boundary::kPeriodic;
  c.spinup_hours = 240.0;
  c.start_timestamp = 1546300800;  // 2019-01-01T00:00:00Z
  return c;
}

}  // namespace aeroop
