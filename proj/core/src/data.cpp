// Copyright 2026 The aeroop Authors
// SPDX-License-Identifier: Apache-2.0

#include "aeroop/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "aeroop/error.hpp"
#include "aeroop/rng.hpp"
#include "binio.hpp"

namespace aeroop {
namespace {

constexpr char kGsfMagic[] = "GSF1";
constexpr std::uint32_t kGsfVersion = 1;

}  // namespace

std::size_t GridSeries::validate() const {
  if (timestamps.size() != t) {
    throw DataError("grid series: " + std::to_string(timestamps.size()) +
                    " timestamps for T=" + std::to_string(t));
  }
  if (values.size() != t * h * w) {
    throw DataError("grid series: " + std::to_string(values.size()) + " values for " +
                    std::to_string(t) + "x" + std::to_string(h) + "x" + std::to_string(w));
  }
  for (std::size_t i = 1; i < t; ++i) {
    if (timestamps[i] <= timestamps[i - 1]) {
      throw DataError("grid series: timestamps not strictly increasing at index " +
                      std::to_string(i));
    }
  }
  std::size_t negative = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw DataError("grid series: non-finite value at flat index " + std::to_string(i));
    }
    if (values[i] < 0.0f) ++negative;
  }
  return negative;
}

Tensor GridSeries::frames(std::size_t t0, std::size_t n) const {
  if (t0 + n > t) {
    throw DataError("grid series: frames [" + std::to_string(t0) + ", " +
                    std::to_string(t0 + n) + ") exceed T=" + std::to_string(t));
  }
  const std::size_t plane = h * w;
  std::vector<double> out(values.begin() + static_cast<std::ptrdiff_t>(t0 * plane),
                          values.begin() + static_cast<std::ptrdiff_t>((t0 + n) * plane));
  return Tensor::real({n, h, w}, std::move(out));
}

std::vector<unsigned char> encode_gsf(const GridSeries& series) {
  series.validate();
  binio::Writer out;
  out.text(std::string_view(kGsfMagic, 4));
  out.u32(kGsfVersion);
  out.u64(series.t);
  out.u64(series.h);
  out.u64(series.w);
  out.u8(series.georef ? 1 : 0);
  if (series.georef) {
    out.f64(series.georef->lat0);
    out.f64(series.georef->lon0);
    out.f64(series.georef->dlat);
    out.f64(series.georef->dlon);
  }
  for (std::int64_t ts : series.timestamps) out.i64(ts);
  for (float v : series.values) out.f32(v);
  return out.take();
}

GridSeries decode_gsf(const std::vector<unsigned char>& bytes) {
  binio::Reader in(bytes, "gsf");
  if (in.text(4, "magic") != std::string_view(kGsfMagic, 4)) in.fail(0, "bad magic");
  const std::size_t version_at = in.offset();
  const std::uint32_t version = in.u32("version");
  if (version != kGsfVersion) {
    in.fail(version_at, "unsupported version " + std::to_string(version));
  }
  GridSeries s;
  s.t = in.u64("T");
  s.h = in.u64("H");
  s.w = in.u64("W");
  const std::size_t flag_at = in.offset();
  const std::uint8_t flag = in.u8("georef flag");
  if (flag > 1) in.fail(flag_at, "georef flag must be 0 or 1, got " + std::to_string(flag));
  if (flag == 1) {
    GeoRef g;
    g.lat0 = in.f64("lat0");
    g.lon0 = in.f64("lon0");
    g.dlat = in.f64("dlat");
    g.dlon = in.f64("dlon");
    s.georef = g;
  }
  // Guard against absurd headers before allocating.
  const std::size_t limit = in.remaining();
  if (s.t > limit / 8) in.need(s.t * 8, "timestamps");
  s.timestamps.resize(s.t);
  for (std::size_t i = 0; i < s.t; ++i) {
    const std::size_t at = in.offset();
    s.timestamps[i] = in.i64("timestamps");
    if (i > 0 && s.timestamps[i] <= s.timestamps[i - 1]) {
      in.fail(at, "timestamp " + std::to_string(i) + " not strictly increasing");
    }
  }
  const std::size_t plane = s.h * s.w;
  if (s.h != 0 && plane / s.h != s.w) in.fail(flag_at, "grid extents overflow");
  if (plane != 0 && s.t > in.remaining() / 4 / plane) in.need(s.t * plane * 4, "values");
  s.values.resize(s.t * plane);
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    const std::size_t at = in.offset();
    s.values[i] = in.f32("values");
    if (!std::isfinite(s.values[i])) in.fail(at, "non-finite value");
  }
  if (in.remaining() != 0) {
    in.fail(in.offset(), std::to_string(in.remaining()) + " trailing bytes");
  }
  return s;
}

void save_gsf(const GridSeries& series, const std::string& path) {
  binio::write_file(path, encode_gsf(series));
}

GridSeries load_gsf(const std::string& path) { return decode_gsf(binio::read_file(path)); }

Normalizer::Normalizer(double lo, double hi) : vmin(lo), vmax(hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo)) {
    throw DataError("normalizer: degenerate range [" + std::to_string(lo) + ", " +
                    std::to_string(hi) + "]");
  }
}

Tensor Normalizer::apply(const Tensor& t) const {
  std::vector<double> v(t.values().begin(), t.values().end());
  for (double& x : v) x = apply(x);
  return Tensor::real(t.shape(), std::move(v));
}

Tensor Normalizer::invert(const Tensor& t) const {
  std::vector<double> v(t.values().begin(), t.values().end());
  for (double& x : v) x = invert(x);
  return Tensor::real(t.shape(), std::move(v));
}

std::vector<WindowSample> make_windows(const GridSeries& series, std::size_t window_len,
                                       std::size_t k, std::size_t stride) {
  if (k < 1 || window_len <= k) {
    throw ConfigError("windows: need 1 <= k < window_len, got k=" + std::to_string(k) +
                      " window_len=" + std::to_string(window_len));
  }
  if (stride < 1) throw ConfigError("windows: stride must be >= 1");
  if (series.t < window_len) {
    throw DataError("windows: series has " + std::to_string(series.t) +
                    " steps, fewer than the window length " + std::to_string(window_len));
  }
  std::vector<WindowSample> out;
  for (std::size_t start = 0; start + window_len <= series.t; start += stride) {
    WindowSample w;
    w.inputs = series.frames(start, k);
    w.targets = series.frames(start + k, window_len - k);
    w.start_index = start;
    w.start_timestamp = series.timestamps[start];
    out.push_back(std::move(w));
  }
  return out;
}

Normalizer fit_normalizer(const std::vector<WindowSample>& windows) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& w : windows) {
    for (const Tensor* t : {&w.inputs, &w.targets}) {
      for (double v : t->values()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  }
  if (windows.empty()) throw DataError("normalizer: no training windows");
  return Normalizer(lo, hi);
}

WindowSample normalize(const WindowSample& sample, const Normalizer& norm) {
  WindowSample out = sample;
  out.inputs = norm.apply(sample.inputs);
  out.targets = norm.apply(sample.targets);
  return out;
}

std::vector<WindowSample> normalize(const std::vector<WindowSample>& windows,
                                    const Normalizer& norm) {
  std::vector<WindowSample> out;
  out.reserve(windows.size());
  for (const auto& w : windows) out.push_back(normalize(w, norm));
  return out;
}

DatasetSplit shuffle_split(const std::vector<WindowSample>& windows, std::size_t n_train,
                           std::size_t n_val, std::uint64_t seed) {
  if (n_train + n_val > windows.size()) {
    throw DataError("split: requested " + std::to_string(n_train) + " train + " +
                    std::to_string(n_val) + " val windows but only " +
                    std::to_string(windows.size()) + " exist");
  }
  std::vector<std::size_t> order(windows.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng = Rng::stream("data-pipeline", seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }
  DatasetSplit split;
  split.seed = seed;
  for (std::size_t i = 0; i < n_train; ++i) split.train.push_back(windows[order[i]]);
  for (std::size_t i = n_train; i < n_train + n_val; ++i) split.val.push_back(windows[order[i]]);
  return split;
}

std::pair<std::size_t, std::size_t> grid_index_of(const GeoRef& g, std::size_t h,
                                                  std::size_t w, double lat, double lon) {
  const double r = std::round((lat - g.lat0) / g.dlat);
  const double c = std::round((lon - g.lon0) / g.dlon);
  if (!std::isfinite(r) || !std::isfinite(c) || r < 0 || c < 0 ||
      r >= static_cast<double>(h) || c >= static_cast<double>(w)) {
    throw DataError("grid index: (" + std::to_string(lat) + ", " + std::to_string(lon) +
                    ") lies outside the " + std::to_string(h) + "x" + std::to_string(w) +
                    " grid");
  }
  return {static_cast<std::size_t>(r), static_cast<std::size_t>(c)};
}

void write_point_csv(const std::string& path, const std::vector<std::int64_t>& timestamps,
                     const std::vector<double>& values) {
  if (timestamps.size() != values.size()) {
    throw ShapeError("point csv: " + std::to_string(timestamps.size()) + " timestamps for " +
                     std::to_string(values.size()) + " values");
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out.precision(17);
  out << "timestamp,value\n";
  for (std::size_t i = 0; i < values.size(); ++i) out << timestamps[i] << ',' << values[i] << '\n';
  if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace aeroop
