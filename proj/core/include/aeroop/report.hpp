// Copyright 2026 The aeroop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "aeroop/evaluation.hpp"

namespace aeroop {

/// 16-bit binary PGM ("P5", maxval 65535). The header carries the scaling
/// range as a comment `# vmin=<v> vmax=<v>`; pixel = round((v - vmin) /
/// (vmax - vmin) * 65535), clamped. Rows are written north-up, i.e. grid row
/// H - 1 first, since grid row 0 is the southern edge.
void write_pgm(const std::string& path, const Tensor& field, double vmin, double vmax);
/// write_pgm scaled by the field's own min and max.
void write_pgm(const std::string& path, const Tensor& field);

struct PgmImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::uint32_t maxval = 0;
  double vmin = 0.0;
  double vmax = 0.0;
  /// File order (north row first).
  std::vector<std::uint16_t> pixels;

  /// Rescaled H x W field in grid orientation.
  Tensor to_field() const;
};
PgmImage read_pgm(const std::string& path);

/// Lowercase alphanumeric file-name stem of a run label: "CoNOAir(4)" -> "conoair4".
std::string label_slug(const std::string& label);

std::string error_evolution_csv(const ErrorEvolution& evolution);
/// One row per (sample, step) with full precision: `sample,step,rmse,mae,rl2`.
std::string sample_log_csv(const ErrorEvolution& evolution);

struct EvaluationReport {
  MetricTable table;
  std::vector<std::pair<std::string, ErrorEvolution>> evolutions;
  std::vector<std::pair<std::string, std::vector<PointSeries>>> points;
  std::vector<ExtremeEvent> events;
};

/// Writes whichever parts are populated:
///   metric_table.csv, evolution_<slug>.csv, samples_<slug>.csv,
///   parity_<slug>.csv plus point_<slug>_r<R>_c<C>_{observed,predicted}.csv,
///   events.csv plus event_<rank>_{truth,prediction,abs_error}.pgm.
/// Returns the paths written, in order.
std::vector<std::string> render_outputs(const EvaluationReport& report, const std::string& outdir);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace aeroop
