// Copyright 2026 The aeroop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aeroop/data.hpp"
#include "aeroop/model.hpp"

namespace aeroop {

/// sqrt(mean((y - yhat)^2)).
double rmse(std::span<const double> y, std::span<const double> yhat);
/// mean(|y - yhat|).
double mae(std::span<const double> y, std::span<const double> yhat);
/// ||y - yhat|| / ||y||; throws DataError when ||y|| == 0.
double rl2(std::span<const double> y, std::span<const double> yhat);
/// 1 - SSE / SST; throws DataError for fewer than two points or zero variance.
double r2(std::span<const double> observed, std::span<const double> predicted);

enum class Metric { kRmse = 0, kMae = 1, kRl2 = 2 };
constexpr std::array<Metric, 3> kMetrics{Metric::kRmse, Metric::kMae, Metric::kRl2};
std::string metric_name(Metric metric);

struct MeanStd {
  double mean = 0.0;
  /// Population standard deviation.
  double std = 0.0;
};
MeanStd mean_std(std::span<const double> values);

/// history (k x H x W) and step count -> n x H x W forecast.
using Forecaster = std::function<Tensor(const Tensor& history, std::size_t n)>;
Forecaster model_forecaster(const OperatorModel& model);

/// Per-step metric statistics over samples. per_sample[s][i][m] is metric m
/// of sample s at step i + 1.
struct ErrorEvolution {
  std::size_t steps = 0;
  std::vector<std::vector<std::array<double, 3>>> per_sample;
  /// summary[i][m] for step i + 1.
  std::vector<std::array<MeanStd, 3>> summary;

  const MeanStd& at(std::size_t step, Metric metric) const {
    return summary.at(step - 1)[static_cast<std::size_t>(metric)];
  }
};

/// Worker count: hardware concurrency capped by the AEROOP_THREADS
/// environment variable (minimum 1).
std::size_t worker_threads();

/// Rolls every sample out n steps and scores each step against its targets.
/// With a normalizer, predictions and targets are denormalized before
/// scoring. Samples are processed in parallel; the reduction is sequential,
/// so results do not depend on the thread count.
ErrorEvolution evaluate_rollout(const Forecaster& forecaster,
                                const std::vector<WindowSample>& samples, std::size_t n,
                                const Normalizer* denormalize = nullptr,
                                std::size_t threads = 0);

/// Comparison table: one mean (std) cell per metric, model label and horizon.
class MetricTable {
 public:
  void add(const std::string& label, std::size_t horizon, const ErrorEvolution& evolution);
  const std::vector<std::string>& labels() const { return labels_; }
  std::vector<std::size_t> horizons() const;
  std::optional<MeanStd> cell(Metric metric, const std::string& label, std::size_t horizon) const;
  /// Header `horizon,metric,<label>...`; cells formatted by format_cell.
  std::string to_csv() const;

 private:
  std::vector<std::string> labels_;
  std::map<std::pair<std::string, std::size_t>, std::array<MeanStd, 3>> cells_;
};

/// "0.138 (0.042)": both values rounded to three decimals with trailing
/// zeros removed.
std::string format_cell(const MeanStd& cell);
std::string format_decimal(double value, int digits = 3);

struct GridPoint {
  std::size_t row = 0;
  std::size_t col = 0;
};

struct PointSeries {
  GridPoint point;
  std::vector<std::int64_t> timestamps;
  std::vector<double> observed;
  std::vector<double> predicted;
  /// NaN when the observed series is constant.
  double r2 = 0.0;
  double rmse = 0.0;
  double mae = 0.0;
};

/// For every start s with s + k + horizon <= T, forecasts `horizon` steps
/// from frames [s, s + k) of the normalized series and records the final
/// step at each point, denormalized, against the observed value.
std::vector<PointSeries> point_series(const Forecaster& forecaster, const GridSeries& series,
                                      const Normalizer& normalizer, std::size_t k,
                                      std::size_t horizon, const std::vector<GridPoint>& points,
                                      std::size_t threads = 0);

struct ExtremeEvent {
  std::size_t index = 0;
  std::int64_t timestamp = 0;
  double spatial_sum = 0.0;
  Tensor truth;  // H x W, physical units
  std::optional<Tensor> prediction;
  std::optional<Tensor> abs_error;
};

/// UTC hour of day of an epoch-seconds timestamp.
int hour_of_day(std::int64_t timestamp);

/// Top-k timestamps by spatial sum, descending, ties toward the earlier
/// timestamp, optionally restricted to one hour of day. With a forecaster,
/// events with at least k history frames get a one-step prediction from the
/// true history and its absolute-error map.
std::vector<ExtremeEvent> extreme_events(const GridSeries& series, std::size_t top_k,
                                         std::optional<int> hour_filter = std::nullopt,
                                         const Forecaster* forecaster = nullptr,
                                         const Normalizer* normalizer = nullptr,
                                         std::size_t history_k = 0);

}  // namespace aeroop
