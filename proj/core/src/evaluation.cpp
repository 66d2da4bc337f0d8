// Copyright 2026 The aeroop Authors
// SPDX-License-Identifier: Apache-2.0

#include "aeroop/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "aeroop/error.hpp"

namespace aeroop {
namespace {

void require_same_length(std::span<const double> a, std::span<const double> b, const char* op) {
  if (a.size() != b.size() || a.empty()) {
    throw ShapeError(std::string(op) + ": lengths " + std::to_string(a.size()) + " and " +
                     std::to_string(b.size()) + " must be equal and nonzero");
  }
}

// Runs task(i) for i in [0, n) on up to `threads` workers; rethrows the
// first failure.
template <class F>
void parallel_for(std::size_t n, std::size_t threads, F task) {
  threads = std::max<std::size_t>(1, std::min(threads == 0 ? worker_threads() : threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

double rmse(std::span<const double> y, std::span<const double> yhat) {
  require_same_length(y, yhat, "rmse");
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - yhat[i]) * (y[i] - yhat[i]);
  return std::sqrt(s / static_cast<double>(y.size()));
}

double mae(std::span<const double> y, std::span<const double> yhat) {
  require_same_length(y, yhat, "mae");
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += std::abs(y[i] - yhat[i]);
  return s / static_cast<double>(y.size());
}

double rl2(std::span<const double> y, std::span<const double> yhat) {
  require_same_length(y, yhat, "rl2");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    num += (y[i] - yhat[i]) * (y[i] - yhat[i]);
    den += y[i] * y[i];
  }
  if (!(den > 0.0)) throw DataError("rl2: ground truth has zero norm");
  return std::sqrt(num) / std::sqrt(den);
}

double r2(std::span<const double> observed, std::span<const double> predicted) {
  require_same_length(observed, predicted, "r2");
  if (observed.size() < 2) throw DataError("r2: need at least two points");
  const double mean = std::accumulate(observed.begin(), observed.end(), 0.0) /
                      static_cast<double>(observed.size());
  double sse = 0.0, sst = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    sse += (observed[i] - predicted[i]) * (observed[i] - predicted[i]);
    sst += (observed[i] - mean) * (observed[i] - mean);
  }
  if (!(sst > 0.0)) throw DataError("r2: observed series has zero variance");
  return 1.0 - sse / sst;
}

std::string metric_name(Metric metric) {
  switch (metric) {
    case Metric::kRmse: return "RMSE";
    case Metric::kMae: return "MAE";
    case Metric::kRl2: return "RL2";
  }
  return "?";
}

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) throw DataError("mean_std: no values");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / n)};
}

Forecaster model_forecaster(const OperatorModel& model) {
  return [&model](const Tensor& history, std::size_t n) {
    return predict_rollout(model, history, n);
  };
}

std::size_t worker_threads() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("AEROOP_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) n = std::min(n, static_cast<std::size_t>(cap));
  }
  return n;
}

ErrorEvolution evaluate_rollout(const Forecaster& forecaster,
                                const std::vector<WindowSample>& samples, std::size_t n,
                                const Normalizer* denormalize, std::size_t threads) {
  if (n < 1) throw ShapeError("evaluate: horizon must be >= 1");
  if (samples.empty()) throw DataError("evaluate: no samples");
  for (const auto& s : samples) {
    if (s.targets.dim(0) < n) {
      throw DataError("evaluate: sample at index " + std::to_string(s.start_index) + " has " +
                      std::to_string(s.targets.dim(0)) + " targets, horizon needs " +
                      std::to_string(n));
    }
  }
  ErrorEvolution ev;
  ev.steps = n;
  ev.per_sample.assign(samples.size(), {});
  parallel_for(samples.size(), threads, [&](std::size_t s) {
    const WindowSample& sample = samples[s];
    Tensor pred = forecaster(sample.inputs, n);
    const std::size_t plane = sample.targets.size() / sample.targets.dim(0);
    if (pred.size() != n * plane) {
      throw ShapeError("evaluate: forecast " + shape_str(pred.shape()) + " does not hold " +
                       std::to_string(n) + " frames of " + std::to_string(plane) + " cells");
    }
    std::vector<std::array<double, 3>> rows(n);
    std::vector<double> y(plane), yhat(plane);
    for (std::size_t i = 0; i < n; ++i) {
      auto t = sample.targets.values().subspan(i * plane, plane);
      auto p = pred.values().subspan(i * plane, plane);
      for (std::size_t j = 0; j < plane; ++j) {
        y[j] = denormalize ? denormalize->invert(t[j]) : t[j];
        yhat[j] = denormalize ? denormalize->invert(p[j]) : p[j];
      }
      rows[i] = {rmse(y, yhat), mae(y, yhat), rl2(y, yhat)};
    }
    ev.per_sample[s] = std::move(rows);
  });
  ev.summary.resize(n);
  std::vector<double> column(samples.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t m = 0; m < 3; ++m) {
      for (std::size_t s = 0; s < samples.size(); ++s) column[s] = ev.per_sample[s][i][m];
      ev.summary[i][m] = mean_std(column);
    }
  }
  return ev;
}

void MetricTable::add(const std::string& label, std::size_t horizon,
                      const ErrorEvolution& evolution) {
  if (horizon < 1 || horizon > evolution.steps) {
    throw ShapeError("metric table: horizon " + std::to_string(horizon) +
                     " outside the evaluated 1.." + std::to_string(evolution.steps));
  }
  if (std::find(labels_.begin(), labels_.end(), label) == labels_.end()) labels_.push_back(label);
  cells_[{label, horizon}] = evolution.summary[horizon - 1];
}

std::vector<std::size_t> MetricTable::horizons() const {
  std::set<std::size_t> hs;
  for (const auto& c : cells_) hs.insert(c.first.second);
  return {hs.begin(), hs.end()};
}

std::optional<MeanStd> MetricTable::cell(Metric metric, const std::string& label,
                                         std::size_t horizon) const {
  auto it = cells_.find({label, horizon});
  if (it == cells_.end()) return std::nullopt;
  return it->second[static_cast<std::size_t>(metric)];
}

std::string MetricTable::to_csv() const {
  std::ostringstream out;
  out << "horizon,metric";
  for (const auto& l : labels_) out << ',' << l;
  out << '\n';
  for (std::size_t h : horizons()) {
    for (Metric m : kMetrics) {
      out << h << ',' << metric_name(m);
      for (const auto& l : labels_) {
        out << ',';
        if (auto c = cell(m, l, h)) out << format_cell(*c);
      }
      out << '\n';
    }
  }
  return out.str();
}

std::string format_decimal(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, value);
  std::string s = buf;
  if (s.find('.') != std::string::npos) {
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

std::string format_cell(const MeanStd& cell) {
  return format_decimal(cell.mean) + " (" + format_decimal(cell.std) + ")";
}

std::vector<PointSeries> point_series(const Forecaster& forecaster, const GridSeries& series,
                                      const Normalizer& normalizer, std::size_t k,
                                      std::size_t horizon, const std::vector<GridPoint>& points,
                                      std::size_t threads) {
  if (horizon < 1) throw ShapeError("point series: horizon must be >= 1");
  for (const auto& p : points) {
    if (p.row >= series.h || p.col >= series.w) {
      throw ShapeError("point series: point (" + std::to_string(p.row) + ", " +
                       std::to_string(p.col) + ") outside the " + std::to_string(series.h) +
                       "x" + std::to_string(series.w) + " grid");
    }
  }
  if (series.t < k + horizon) throw DataError("point series: series too short for one forecast");
  const std::size_t starts = series.t - k - horizon + 1;
  const std::size_t plane = series.h * series.w;
  std::vector<std::vector<double>> values(starts, std::vector<double>(points.size()));
  parallel_for(starts, threads, [&](std::size_t s) {
    Tensor history = normalizer.apply(series.frames(s, k));
    Tensor pred = forecaster(history, horizon);
    auto last = pred.values().subspan((horizon - 1) * plane, plane);
    for (std::size_t p = 0; p < points.size(); ++p) {
      values[s][p] = normalizer.invert(last[points[p].row * series.w + points[p].col]);
    }
  });
  std::vector<PointSeries> out;
  for (std::size_t p = 0; p < points.size(); ++p) {
    PointSeries ps;
    ps.point = points[p];
    for (std::size_t s = 0; s < starts; ++s) {
      const std::size_t target = s + k + horizon - 1;
      ps.timestamps.push_back(series.timestamps[target]);
      ps.observed.push_back(series.at(target, points[p].row, points[p].col));
      ps.predicted.push_back(values[s][p]);
    }
    ps.rmse = rmse(ps.observed, ps.predicted);
    ps.mae = mae(ps.observed, ps.predicted);
    // r2 is undefined for a point whose observed series never changes.
    const auto [lo, hi] = std::minmax_element(ps.observed.begin(), ps.observed.end());
    ps.r2 = *lo == *hi ? std::numeric_limits<double>::quiet_NaN() : r2(ps.observed, ps.predicted);
    out.push_back(std::move(ps));
  }
  return out;
}

int hour_of_day(std::int64_t timestamp) {
  const std::int64_t day = 86400;
  return static_cast<int>((((timestamp % day) + day) % day) / 3600);
}

std::vector<ExtremeEvent> extreme_events(const GridSeries& series, std::size_t top_k,
                                         std::optional<int> hour_filter,
                                         const Forecaster* forecaster,
                                         const Normalizer* normalizer, std::size_t history_k) {
  const std::size_t plane = series.h * series.w;
  std::vector<std::pair<double, std::size_t>> ranked;
  for (std::size_t t = 0; t < series.t; ++t) {
    if (hour_filter && hour_of_day(series.timestamps[t]) != *hour_filter) continue;
    double sum = 0.0;
    for (std::size_t j = 0; j < plane; ++j) sum += series.values[t * plane + j];
    ranked.emplace_back(sum, t);
  }
  // Descending sum; ties keep the earlier (smaller) index first.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  if (ranked.size() > top_k) ranked.resize(top_k);

  std::vector<ExtremeEvent> out;
  for (const auto& [sum, t] : ranked) {
    ExtremeEvent e;
    e.index = t;
    e.timestamp = series.timestamps[t];
    e.spatial_sum = sum;
    e.truth = series.frames(t, 1).reshaped({series.h, series.w});
    if (forecaster != nullptr && history_k > 0 && t >= history_k) {
      Tensor history = series.frames(t - history_k, history_k);
      if (normalizer) history = normalizer->apply(history);
      Tensor pred = (*forecaster)(history, 1).reshaped({series.h, series.w});
      if (normalizer) pred = normalizer->invert(pred);
      std::vector<double> err(plane);
      for (std::size_t j = 0; j < plane; ++j) {
        err[j] = std::abs(pred.values()[j] - e.truth.values()[j]);
      }
      e.abs_error = Tensor::real({series.h, series.w}, std::move(err));
      e.prediction = std::move(pred);
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace aeroop
