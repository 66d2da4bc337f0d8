// Copyright 2026 The aeroop Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "aeroop/data.hpp"
#include "aeroop/error.hpp"
#include "test_util.hpp"

using namespace aeroop;
using testutil::Gen;

namespace {

GridSeries random_series(Gen& g, std::size_t t, std::size_t h, std::size_t w, bool georef) {
  GridSeries s;
  s.t = t;
  s.h = h;
  s.w = w;
  std::int64_t ts = 1546300800;
  for (std::size_t i = 0; i < t; ++i) {
    s.timestamps.push_back(ts);
    ts += 3600;
  }
  for (std::size_t i = 0; i < t * h * w; ++i) s.values.push_back(static_cast<float>(g.uniform(0, 5)));
  if (georef) s.georef = GeoRef{8.0, 68.0, 0.25, 0.25};
  return s;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("aeroop_data_" + name)).string();
}

std::string error_of(const std::vector<unsigned char>& bytes) {
  try {
    decode_gsf(bytes);
  } catch (const FormatError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Gsf, RoundTripIsBitExact) {
  Gen g(1);
  for (bool georef : {false, true}) {
    const GridSeries s = random_series(g, 5, 4, 3, georef);
    const auto bytes = encode_gsf(s);
    EXPECT_EQ(bytes.size(), 4 + 4 + 24 + 1 + (georef ? 32 : 0) + 5 * 8 + 60 * 4u);
    const std::string path = temp_path(georef ? "geo.gsf" : "plain.gsf");
    save_gsf(s, path);
    const GridSeries back = load_gsf(path);
    EXPECT_EQ(back.timestamps, s.timestamps);
    EXPECT_EQ(std::memcmp(back.values.data(), s.values.data(), s.values.size() * 4), 0);
    EXPECT_EQ(back.georef.has_value(), georef);
    EXPECT_EQ(encode_gsf(back), bytes);
    std::filesystem::remove(path);
  }
}

TEST(Gsf, LayoutIsLittleEndian) {
  Gen g(2);
  const auto bytes = encode_gsf(random_series(g, 26, 2, 2, false));
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "GSF1");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[8], 26);
  EXPECT_EQ(bytes[16], 2);
  EXPECT_EQ(decode_gsf(bytes).t, 26u);
}

TEST(Gsf, BadMagicIsRejected) {
  Gen g(3);
  auto bytes = encode_gsf(random_series(g, 2, 2, 2, false));
  std::copy_n("XXXX", 4, bytes.begin());
  EXPECT_NE(error_of(bytes).find("bad magic"), std::string::npos);
}

TEST(Gsf, TruncationNamesOffset) {
  Gen g(4);
  const auto full = encode_gsf(random_series(g, 3, 2, 2, true));
  for (std::size_t cut : {0u, 3u, 10u, 40u, 80u}) {
    const std::vector<unsigned char> part(full.begin(), full.begin() + cut);
    const std::string msg = error_of(part);
    EXPECT_NE(msg.find("truncated"), std::string::npos) << cut;
    EXPECT_NE(msg.find("offset"), std::string::npos) << cut;
  }
  std::vector<unsigned char> last(full.begin(), full.end() - 1);
  EXPECT_NE(error_of(last).find("offset"), std::string::npos);
  std::vector<unsigned char> extra = full;
  extra.push_back(0);
  EXPECT_NE(error_of(extra).find("trailing"), std::string::npos);
}

TEST(Gsf, NonIncreasingTimestampsAreRejected) {
  Gen g(5);
  GridSeries s = random_series(g, 3, 2, 2, false);
  auto bytes = encode_gsf(s);
  // Overwrite timestamp 2 with timestamp 1.
  std::copy_n(bytes.begin() + 33 + 8, 8, bytes.begin() + 33 + 16);
  EXPECT_NE(error_of(bytes).find("not strictly increasing"), std::string::npos);
  s.timestamps[2] = s.timestamps[1];
  EXPECT_THROW(encode_gsf(s), DataError);
}

TEST(Gsf, NegativeValuesAreCounted) {
  Gen g(6);
  GridSeries s = random_series(g, 2, 2, 2, false);
  s.values[3] = -1.0f;
  s.values[5] = -0.5f;
  EXPECT_EQ(s.validate(), 2u);
  s.values[1] = std::nanf("");
  EXPECT_THROW(s.validate(), DataError);
}

TEST(Gsf, MissingFileIsAnError) { EXPECT_THROW(load_gsf(temp_path("absent.gsf")), Error); }

TEST(Windows, CountsAndSplit) {
  Gen g(7);
  const GridSeries s100 = random_series(g, 100, 2, 3, false);
  EXPECT_EQ(make_windows(s100).size(), 75u);
  EXPECT_EQ(make_windows(s100, 26, 10, 4).size(), 19u);
  const GridSeries s26 = random_series(g, 26, 2, 3, false);
  const auto one = make_windows(s26);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].inputs.shape(), (Shape{10, 2, 3}));
  EXPECT_EQ(one[0].targets.shape(), (Shape{16, 2, 3}));
  EXPECT_THROW(make_windows(random_series(g, 25, 2, 3, false)), DataError);
}

TEST(Windows, ContentMatchesSeries) {
  Gen g(8);
  const GridSeries s = random_series(g, 40, 3, 2, false);
  for (std::size_t stride : {1u, 3u, 7u}) {
    const auto ws = make_windows(s, 12, 5, stride);
    EXPECT_EQ(ws.size(), (40 - 12) / stride + 1);
    for (std::size_t i = 0; i < ws.size(); ++i) {
      const std::size_t t0 = i * stride;
      EXPECT_EQ(ws[i].start_index, t0);
      EXPECT_EQ(ws[i].start_timestamp, s.timestamps[t0]);
      EXPECT_EQ(ws[i].inputs.dim(0) + ws[i].targets.dim(0), 12u);
      for (std::size_t k = 0; k < 12; ++k) {
        const Tensor& src = k < 5 ? ws[i].inputs : ws[i].targets;
        const std::size_t kk = k < 5 ? k : k - 5;
        for (std::size_t p = 0; p < 6; ++p) {
          EXPECT_EQ(src.values()[kk * 6 + p], static_cast<double>(s.values[(t0 + k) * 6 + p]));
        }
      }
    }
  }
}

TEST(Normalizer, MapsRangeAndInverts) {
  const Normalizer n(0.0, 2.0);
  EXPECT_EQ(n.apply(1.0), 0.5);
  EXPECT_EQ(n.apply(3.0), 1.5);
  EXPECT_THROW(Normalizer(1.0, 1.0), DataError);
  EXPECT_THROW(Normalizer(2.0, 1.0), DataError);
  Gen g(9);
  const Normalizer m(-3.0, 17.0);
  const Tensor x = g.real({50}, -10.0, 30.0);
  EXPECT_LT(max_abs_diff(m.invert(m.apply(x)), x), 1e-12);
}

TEST(Normalizer, UsesTrainSubsetOnly) {
  Gen g(10);
  GridSeries s = random_series(g, 60, 2, 2, false);
  const auto windows = make_windows(s, 12, 4, 1);
  const DatasetSplit split = shuffle_split(windows, 20, 10, 77);
  // Raise every value that only the validation windows can see.
  std::set<std::size_t> train_frames;
  for (const auto& w : split.train) {
    for (std::size_t k = 0; k < 12; ++k) train_frames.insert(w.start_index + k);
  }
  std::vector<WindowSample> val = split.val;
  for (auto& w : val) {
    for (double& v : w.targets.values()) v += 100.0;
  }
  double lo = 1e300, hi = -1e300;
  for (std::size_t t : train_frames) {
    for (std::size_t p = 0; p < 4; ++p) {
      lo = std::min(lo, static_cast<double>(s.values[t * 4 + p]));
      hi = std::max(hi, static_cast<double>(s.values[t * 4 + p]));
    }
  }
  const Normalizer n = fit_normalizer(split.train);
  EXPECT_EQ(n.vmin, lo);
  EXPECT_EQ(n.vmax, hi);
  std::vector<WindowSample> all = split.train;
  all.insert(all.end(), val.begin(), val.end());
  EXPECT_GT(fit_normalizer(all).vmax, hi + 50.0);
  const WindowSample z = normalize(split.train[0], n);
  for (double v : z.inputs.values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Split, DeterministicDisjointSubset) {
  Gen g(11);
  const auto windows = make_windows(random_series(g, 35, 2, 2, false), 26, 10, 1);
  ASSERT_EQ(windows.size(), 10u);
  const DatasetSplit a = shuffle_split(windows, 3, 2, 5), b = shuffle_split(windows, 3, 2, 5);
  std::set<std::size_t> starts, all;
  for (const auto& w : windows) all.insert(w.start_index);
  for (const auto& w : a.train) starts.insert(w.start_index);
  for (const auto& w : a.val) starts.insert(w.start_index);
  EXPECT_EQ(starts.size(), 5u);
  for (std::size_t s : starts) EXPECT_TRUE(all.count(s));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(a.train[i].start_index, b.train[i].start_index);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(a.val[i].start_index, b.val[i].start_index);
  EXPECT_EQ(a.seed, 5u);
  EXPECT_THROW(shuffle_split(windows, 8, 3, 5), DataError);
  // Different seeds give different permutations for some seed.
  bool differs = false;
  for (std::uint64_t seed = 6; seed < 12 && !differs; ++seed) {
    differs = shuffle_split(windows, 3, 2, seed).train[0].start_index != a.train[0].start_index;
  }
  EXPECT_TRUE(differs);
}

TEST(GridIndex, ExamplesAndBruteForce) {
  const GeoRef geo{8.0, 68.0, 0.25, 0.5};
  EXPECT_EQ(grid_index_of(geo, 10, 20, 8.0, 68.0), (std::pair<std::size_t, std::size_t>{0, 0}));
  EXPECT_EQ(grid_index_of(geo, 10, 20, 8.75, 71.5), (std::pair<std::size_t, std::size_t>{3, 7}));
  EXPECT_THROW(grid_index_of(geo, 10, 20, 20.0, 68.0), DataError);
  EXPECT_THROW(grid_index_of(geo, 10, 20, 8.0, 60.0), DataError);
  Gen g(12);
  for (int trial = 0; trial < 500; ++trial) {
    const double lat = g.uniform(8.0, 8.0 + 9 * 0.25), lon = g.uniform(68.0, 68.0 + 19 * 0.5);
    std::size_t br = 0, bc = 0;
    double best = 1e300;
    for (std::size_t r = 0; r < 10; ++r) {
      for (std::size_t c = 0; c < 20; ++c) {
        const double d = std::pow((lat - 8.0 - r * 0.25) / 0.25, 2) +
                         std::pow((lon - 68.0 - c * 0.5) / 0.5, 2);
        if (d < best) {
          best = d;
          br = r;
          bc = c;
        }
      }
    }
    EXPECT_EQ(grid_index_of(geo, 10, 20, lat, lon), (std::pair<std::size_t, std::size_t>{br, bc}));
  }
}

TEST(PointCsv, HeaderAndRows) {
  const std::string path = temp_path("point.csv");
  write_point_csv(path, {3600, 7200}, {0.5, 1.25});
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str().substr(0, 16), "timestamp,value\n");
  EXPECT_NE(ss.str().find("3600,0.5"), std::string::npos);
  EXPECT_THROW(write_point_csv(path, {1}, {1.0, 2.0}), ShapeError);
  std::filesystem::remove(path);
}
