// Copyright 2026 The aeroop Authors
// SPDX-License-Identifier: Apache-2.0

#include "aeroop/report.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "aeroop/error.hpp"
#include "binio.hpp"

namespace aeroop {

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error("failed writing '" + path + "'");
}

void write_pgm(const std::string& path, const Tensor& field, double vmin, double vmax) {
  if (field.rank() != 2 || field.is_complex()) {
    throw ShapeError("pgm: expects a real H x W field, got " + shape_str(field.shape()));
  }
  if (!std::isfinite(vmin) || !std::isfinite(vmax) || vmax < vmin) {
    throw DataError("pgm: invalid scaling range");
  }
  const std::size_t h = field.dim(0), w = field.dim(1);
  char header[160];
  std::snprintf(header, sizeof header, "P5\n# vmin=%.17g vmax=%.17g\n%zu %zu\n65535\n", vmin,
                vmax, w, h);
  std::vector<unsigned char> bytes(header, header + std::char_traits<char>::length(header));
  const double span = vmax - vmin;
  auto v = field.values();
  for (std::size_t r = h; r-- > 0;) {
    for (std::size_t c = 0; c < w; ++c) {
      double q = span > 0.0 ? (v[r * w + c] - vmin) / span * 65535.0 : 0.0;
      q = std::clamp(std::round(q), 0.0, 65535.0);
      const auto p = static_cast<std::uint16_t>(q);
      bytes.push_back(static_cast<unsigned char>(p >> 8));
      bytes.push_back(static_cast<unsigned char>(p & 0xff));
    }
  }
  binio::write_file(path, bytes);
}

void write_pgm(const std::string& path, const Tensor& field) {
  auto v = field.values();
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  write_pgm(path, field, *lo, *hi);
}

Tensor PgmImage::to_field() const {
  std::vector<double> out(width * height);
  const double span = vmax - vmin;
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const double p = pixels[(height - 1 - r) * width + c];
      out[r * width + c] = vmin + p / static_cast<double>(maxval) * span;
    }
  }
  return Tensor::real({height, width}, std::move(out));
}

PgmImage read_pgm(const std::string& path) {
  const auto bytes = binio::read_file(path);
  std::size_t pos = 0;
  PgmImage img;
  bool have_range = false;
  auto fail = [&](const std::string& msg) {
    throw FormatError("pgm: " + msg + " at byte offset " + std::to_string(pos));
  };
  auto skip_space_and_comments = [&] {
    while (pos < bytes.size()) {
      if (std::isspace(bytes[pos])) {
        ++pos;
      } else if (bytes[pos] == '#') {
        const std::size_t start = pos;
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        const std::string comment(bytes.begin() + static_cast<std::ptrdiff_t>(start),
                                  bytes.begin() + static_cast<std::ptrdiff_t>(pos));
        double lo = 0.0, hi = 0.0;
        if (std::sscanf(comment.c_str(), "# vmin=%lf vmax=%lf", &lo, &hi) == 2) {
          img.vmin = lo;
          img.vmax = hi;
          have_range = true;
        }
      } else {
        break;
      }
    }
  };
  auto number = [&] {
    skip_space_and_comments();
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) fail("expected a header number");
    std::uint64_t v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + static_cast<std::uint64_t>(bytes[pos++] - '0');
      if (v > (1ull << 32)) fail("header number too large");
    }
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') fail("bad magic");
  pos = 2;
  img.width = number();
  img.height = number();
  img.maxval = static_cast<std::uint32_t>(number());
  if (img.maxval == 0 || img.maxval > 65535) fail("maxval out of range");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) fail("missing separator before raster");
  ++pos;
  const std::size_t bpp = img.maxval > 255 ? 2 : 1;
  if (bytes.size() - pos < img.width * img.height * bpp) fail("truncated raster");
  img.pixels.resize(img.width * img.height);
  for (auto& p : img.pixels) {
    p = bpp == 2 ? static_cast<std::uint16_t>((bytes[pos] << 8) | bytes[pos + 1]) : bytes[pos];
    pos += bpp;
  }
  if (!have_range) {
    img.vmin = 0.0;
    img.vmax = img.maxval;
  }
  return img;
}

std::string label_slug(const std::string& label) {
  std::string s;
  for (char c : label) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return s.empty() ? "model" : s;
}

namespace {

std::string full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string error_evolution_csv(const ErrorEvolution& ev) {
  std::ostringstream out;
  out << "step,rmse_mean,rmse_std,mae_mean,mae_std,rl2_mean,rl2_std\n";
  for (std::size_t i = 0; i < ev.steps; ++i) {
    out << i + 1;
    for (const auto& c : ev.summary[i]) out << ',' << full(c.mean) << ',' << full(c.std);
    out << '\n';
  }
  return out.str();
}

std::string sample_log_csv(const ErrorEvolution& ev) {
  std::ostringstream out;
  out << "sample,step,rmse,mae,rl2\n";
  for (std::size_t s = 0; s < ev.per_sample.size(); ++s) {
    for (std::size_t i = 0; i < ev.per_sample[s].size(); ++i) {
      const auto& r = ev.per_sample[s][i];
      out << s << ',' << i + 1 << ',' << full(r[0]) << ',' << full(r[1]) << ',' << full(r[2])
          << '\n';
    }
  }
  return out.str();
}

std::vector<std::string> render_outputs(const EvaluationReport& report,
                                        const std::string& outdir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(outdir, ec);
  if (ec || !fs::is_directory(outdir)) {
    throw Error("cannot create output directory '" + outdir + "'");
  }
  std::vector<std::string> written;
  auto path = [&](const std::string& name) { return (fs::path(outdir) / name).string(); };
  auto emit = [&](const std::string& name, const std::string& text) {
    write_text_file(path(name), text);
    written.push_back(path(name));
  };

  if (!report.table.labels().empty()) emit("metric_table.csv", report.table.to_csv());
  for (const auto& [label, ev] : report.evolutions) {
    emit("evolution_" + label_slug(label) + ".csv", error_evolution_csv(ev));
    emit("samples_" + label_slug(label) + ".csv", sample_log_csv(ev));
  }
  for (const auto& [label, series] : report.points) {
    const std::string slug = label_slug(label);
    std::ostringstream parity;
    parity << "row,col,n,r2,rmse,mae\n";
    for (const auto& ps : series) {
      parity << ps.point.row << ',' << ps.point.col << ',' << ps.observed.size() << ','
             << full(ps.r2) << ',' << full(ps.rmse) << ',' << full(ps.mae) << '\n';
      const std::string stem = "point_" + slug + "_r" + std::to_string(ps.point.row) + "_c" +
                               std::to_string(ps.point.col);
      write_point_csv(path(stem + "_observed.csv"), ps.timestamps, ps.observed);
      written.push_back(path(stem + "_observed.csv"));
      write_point_csv(path(stem + "_predicted.csv"), ps.timestamps, ps.predicted);
      written.push_back(path(stem + "_predicted.csv"));
    }
    emit("parity_" + slug + ".csv", parity.str());
  }
  if (!report.events.empty()) {
    std::ostringstream events;
    events << "rank,index,timestamp,hour,spatial_sum\n";
    for (std::size_t r = 0; r < report.events.size(); ++r) {
      const ExtremeEvent& e = report.events[r];
      events << r + 1 << ',' << e.index << ',' << e.timestamp << ',' << hour_of_day(e.timestamp)
             << ',' << full(e.spatial_sum) << '\n';
      const std::string stem = "event_" + std::to_string(r + 1);
      auto tv = e.truth.values();
      double lo = *std::min_element(tv.begin(), tv.end());
      double hi = *std::max_element(tv.begin(), tv.end());
      if (e.prediction) {
        auto pv = e.prediction->values();
        lo = std::min(lo, *std::min_element(pv.begin(), pv.end()));
        hi = std::max(hi, *std::max_element(pv.begin(), pv.end()));
      }
      write_pgm(path(stem + "_truth.pgm"), e.truth, lo, hi);
      written.push_back(path(stem + "_truth.pgm"));
      if (e.prediction) {
        write_pgm(path(stem + "_prediction.pgm"), *e.prediction, lo, hi);
        written.push_back(path(stem + "_prediction.pgm"));
        auto ev = e.abs_error->values();
        write_pgm(path(stem + "_abs_error.pgm"), *e.abs_error, 0.0,
                  *std::max_element(ev.begin(), ev.end()));
        written.push_back(path(stem + "_abs_error.pgm"));
      }
    }
    emit("events.csv", events.str());
  }
  return written;
}

}  // namespace aeroop
