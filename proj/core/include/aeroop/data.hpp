// Copyright 2026 The aeroop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aeroop/tensor.hpp"

namespace aeroop {

/// Regular lat/lon grid: cell (r, c) is centered at (lat0 + r dlat, lon0 + c dlon).
struct GeoRef {
  double lat0 = 0.0;
  double lon0 = 0.0;
  double dlat = 1.0;
  double dlon = 1.0;
};

/// Timestamped T x H x W stack of scalar fields, row-major [t][h][w].
struct GridSeries {
  std::size_t t = 0;
  std::size_t h = 0;
  std::size_t w = 0;
  /// Epoch seconds, strictly increasing.
  std::vector<std::int64_t> timestamps;
  std::vector<float> values;
  std::optional<GeoRef> georef;

  /// Throws DataError on inconsistent extents, non-increasing timestamps or
  /// non-finite values. Returns the number of negative values (allowed, but
  /// unphysical for concentrations).
  std::size_t validate() const;
  /// Frames [t0, t0 + n) as an n x H x W real64 tensor.
  Tensor frames(std::size_t t0, std::size_t n) const;
  float at(std::size_t ti, std::size_t r, std::size_t c) const {
    return values[(ti * h + r) * w + c];
  }
};

/// GSF1 container: magic "GSF1", u32 version = 1, u64 T, H, W, u8 georef flag,
/// optional 4 x f64 (lat0, lon0, dlat, dlon), T x i64 timestamps, T*H*W f32
/// values; little-endian throughout.
std::vector<unsigned char> encode_gsf(const GridSeries& series);
GridSeries decode_gsf(const std::vector<unsigned char>& bytes);
void save_gsf(const GridSeries& series, const std::string& path);
GridSeries load_gsf(const std::string& path);

/// Linear min-max scaling, vmin -> 0 and vmax -> 1, unclipped.
struct Normalizer {
  double vmin = 0.0;
  double vmax = 1.0;

  Normalizer() = default;
  /// Throws DataError unless vmax > vmin and both are finite.
  Normalizer(double lo, double hi);

  double apply(double v) const { return (v - vmin) / (vmax - vmin); }
  double invert(double v) const { return vmin + v * (vmax - vmin); }
  Tensor apply(const Tensor& t) const;
  Tensor invert(const Tensor& t) const;
};

struct WindowSample {
  /// k x H x W.
  Tensor inputs;
  /// m x H x W.
  Tensor targets;
  std::size_t start_index = 0;
  std::int64_t start_timestamp = 0;
};

struct DatasetSplit {
  std::vector<WindowSample> train;
  std::vector<WindowSample> val;
  std::uint64_t seed = 0;
};

/// Windows starting at 0, stride, ..., each split into k inputs and
/// window_len - k targets. Throws DataError when T < window_len.
std::vector<WindowSample> make_windows(const GridSeries& series, std::size_t window_len = 26,
                                       std::size_t k = 10, std::size_t stride = 1);

/// Global min and max over the inputs and targets of `windows`.
Normalizer fit_normalizer(const std::vector<WindowSample>& windows);
WindowSample normalize(const WindowSample& sample, const Normalizer& norm);
std::vector<WindowSample> normalize(const std::vector<WindowSample>& windows,
                                    const Normalizer& norm);

/// Shuffle with the "data-pipeline" stream of `seed`; the first n_train
/// windows of the permutation train, the next n_val validate.
DatasetSplit shuffle_split(const std::vector<WindowSample>& windows, std::size_t n_train,
                           std::size_t n_val, std::uint64_t seed);

/// Nearest cell by rounding (lat - lat0) / dlat and (lon - lon0) / dlon.
std::pair<std::size_t, std::size_t> grid_index_of(const GeoRef& georef, std::size_t h,
                                                  std::size_t w, double lat, double lon);

/// CSV with header `timestamp,value`.
void write_point_csv(const std::string& path, const std::vector<std::int64_t>& timestamps,
                     const std::vector<double>& values);

}  // namespace aeroop
