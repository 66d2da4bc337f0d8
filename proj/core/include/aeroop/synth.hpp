// Copyright 2026 The aeroop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "aeroop/data.hpp"
#include "aeroop/rng.hpp"

namespace aeroop {

enum class Boundary { kPeriodic, kOutflow };
enum class VelocityKind { kConstant, kStream };

struct Source {
  std::size_t row = 0;
  std::size_t col = 0;
  /// Mean emission rate (concentration per hour).
  double base = 1.0;
  /// Relative diurnal amplitude in [0, 1].
  double amplitude = 0.0;
  /// Phase shift in hours.
  double phase = 0.0;

  /// base * (1 + amplitude * sin(2 pi (t + phase) / 24)).
  double rate(double t_hours) const;
};

/// Velocity field. kStream derives divergence-free face velocities from a
/// stream function on cell corners: a fixed gyre pattern plus `random_modes`
/// low-wavenumber modes whose amplitudes follow an hourly Ornstein-Uhlenbeck
/// process with correlation time `correlation_hours`. The field is rescaled
/// every hour so the largest face speed equals `max_speed`.
struct VelocityConfig {
  VelocityKind kind = VelocityKind::kConstant;
  double u = 0.0;  // along columns (x)
  double v = 0.0;  // along rows (y)
  double max_speed = 0.0;
  double gyre_weight = 1.0;
  std::size_t random_modes = 0;
  double correlation_hours = 48.0;
};

struct SimConfig {
  std::size_t h = 32;
  std::size_t w = 32;
  double dx = 1.0;
  /// Hours between recorded frames.
  double dt = 1.0;
  std::size_t substeps = 4;
  double diffusivity = 0.0;
  double decay = 0.0;
  VelocityConfig velocity;
  std::vector<Source> sources;
  Boundary boundary = Boundary::kPeriodic;
  double spinup_hours = 0.0;
  std::int64_t start_timestamp = 0;

  double dt_sub() const { return dt / static_cast<double>(substeps); }
  /// Throws ConfigError on invalid values, including CFL violations
  /// (max speed * dt_sub / dx <= 0.5, D * dt_sub / dx^2 <= 0.25).
  void validate() const;
};

/// Face velocities: u[i * (W + 1) + b] on the x-face at column edge b of row i,
/// v[a * W + j] on the y-face at row edge a of column j.
struct FaceVelocity {
  std::vector<double> u;
  std::vector<double> v;
};

struct SimState {
  std::vector<double> c;  // H x W
  double time = 0.0;      // hours
};

/// Hourly velocity sequence for one seed.
class VelocityProcess {
 public:
  VelocityProcess(const SimConfig& config, std::uint64_t seed);
  const FaceVelocity& current() const { return field_; }
  /// Advance the random-mode amplitudes by one hour and rebuild the field.
  void advance();

 private:
  void rebuild();

  const SimConfig* config_;
  std::vector<double> amp_;
  std::vector<double> theta_;
  std::vector<int> kx_;
  std::vector<int> ky_;
  Rng rng_;
  FaceVelocity field_;
};

/// One substep: x advection, y advection (first-order upwind, flux form),
/// explicit diffusion, source injection at the substep start time, decay.
void step(SimState& state, const SimConfig& config, const FaceVelocity& velocity);

/// Largest face speed of a velocity field.
double max_face_speed(const FaceVelocity& velocity);

/// Spin up, then record T hourly frames starting at `start_timestamp`.
/// Frame i holds the state at simulation hour i.
GridSeries generate(const SimConfig& config, std::size_t hours, std::uint64_t seed);

struct RefineReport {
  std::size_t substeps = 0;
  /// max |c_s - c_2s| / max |c_2s| at the final hour.
  double discrepancy = 0.0;
  /// Same for 2s against 4s.
  double discrepancy_fine = 0.0;
  /// discrepancy / discrepancy_fine; about 2 for a first-order scheme.
  double ratio = 0.0;
  bool passed = false;
};

/// Runs the scenario for `hours` (after spin-up) with substeps s, 2s and 4s
/// and compares the final fields. Passes when the discrepancy is below 5%.
RefineReport refine_check(const SimConfig& config, std::size_t hours, std::uint64_t seed);

/// Default benchmark scenario: 32 x 32 periodic grid, four diurnal sources
/// with distinct phases, gyre plus slowly varying random flow, decay 0.02/h.
SimConfig urban_toy_config();

}  // namespace aeroop
