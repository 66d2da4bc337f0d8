// Copyright 2026 The aeroop Authors
// SPDX-License-Identifier: Apache-2.0

// aeroop: data generation, training, evaluation, forecasting and reporting.
//
// Exit codes: 0 success, 1 usage or configuration, 2 data or shape, 3 numeric
// failure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aeroop/checkpoint.hpp"
#include "aeroop/config.hpp"
#include "aeroop/data.hpp"
#include "aeroop/error.hpp"
#include "aeroop/evaluation.hpp"
#include "aeroop/model.hpp"
#include "aeroop/report.hpp"
#include "aeroop/synth.hpp"
#include "aeroop/training.hpp"

namespace fs = std::filesystem;
using namespace aeroop;

namespace {

struct DataOptions {
  std::size_t window_len = 26;
  std::size_t stride = 1;
  std::size_t n_train = 300;
  std::size_t n_val = 60;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::size_t hours = 720;
  std::optional<SimConfig> sim;
  std::optional<ModelConfig> model;
  std::optional<TrainConfig> train;
  DataOptions data;
};

RunConfig load_run_config(const std::string& path) {
  const Json json = parse_json_file(path);
  StrictObject o(json, "config");
  RunConfig rc;
  rc.seed = o.u64("seed", rc.seed);
  rc.hours = o.count("hours", rc.hours);
  if (o.has("sim")) rc.sim = sim_config_from_json(o.child("sim"));
  if (o.has("model")) rc.model = model_config_from_json(o.child("model"));
  if (o.has("train")) rc.train = train_config_from_json(o.child("train"));
  if (o.has("data")) {
    StrictObject d(o.child("data"), "data");
    rc.data.window_len = d.count("window_len", rc.data.window_len);
    rc.data.stride = d.count("stride", rc.data.stride);
    rc.data.n_train = d.count("n_train", rc.data.n_train);
    rc.data.n_val = d.count("n_val", rc.data.n_val);
    d.finish();
    if (rc.data.stride < 1) throw ConfigError("data.stride must be >= 1");
  }
  o.finish();
  if (rc.hours < 1) throw ConfigError("config.hours must be >= 1");
  return rc;
}

// Output files go to existing or creatable directories; checked before any work.
void prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error("cannot create directory '" + dir + "'");
}

void prepare_parent(const std::string& file) {
  const fs::path parent = fs::path(file).parent_path();
  if (!parent.empty()) prepare_dir(parent.string());
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

// Forecaster for a grid that may differ from the training grid. Only FNO
// generalizes across resolutions; CoNO raises UnsupportedError on first use.
Forecaster grid_forecaster(const OperatorModel& model, std::size_t h, std::size_t w) {
  if (h == model.grid_h() && w == model.grid_w()) return model_forecaster(model);
  if (model.config().flavor == Flavor::kCono) {
    // Surface the explanation before any work is done.
    Tensor probe = Tensor::zeros({model.config().history_k, h, w});
    evaluate_at_resolution(model, probe);
  }
  return [&model](const Tensor& history, std::size_t n) {
    const std::size_t k = history.dim(0), h = history.dim(1), w = history.dim(2);
    const std::size_t plane = h * w;
    std::vector<double> window(history.values().begin(), history.values().end());
    std::vector<double> out;
    out.reserve(n * plane);
    for (std::size_t s = 0; s < n; ++s) {
      Tensor y = evaluate_at_resolution(model, Tensor::real({k, h, w}, window));
      auto v = y.values();
      out.insert(out.end(), v.begin(), v.end());
      window.erase(window.begin(), window.begin() + static_cast<std::ptrdiff_t>(plane));
      window.insert(window.end(), v.begin(), v.end());
    }
    return Tensor::real({n, h, w}, std::move(out));
  };
}

GridSeries series_from_frames(const Tensor& frames, std::vector<std::int64_t> timestamps,
                              const std::optional<GeoRef>& georef) {
  GridSeries s;
  s.t = frames.dim(0);
  s.h = frames.dim(1);
  s.w = frames.dim(2);
  s.timestamps = std::move(timestamps);
  s.values.reserve(frames.size());
  for (double v : frames.values()) s.values.push_back(static_cast<float>(v));
  s.georef = georef;
  return s;
}

int cmd_gen_data(const std::string& config_path, const std::string& out,
                 std::optional<std::uint64_t> seed) {
  const RunConfig rc = load_run_config(config_path);
  if (!rc.sim) throw ConfigError("config: gen-data requires a 'sim' section");
  prepare_parent(out);
  const std::uint64_t s = seed.value_or(rc.seed);
  const GridSeries series = generate(*rc.sim, rc.hours, s);
  save_gsf(series, out);

  const std::size_t plane = series.h * series.w;
  double lo = 0.0, hi = 0.0, mean = 0.0;
  for (std::size_t t = 0; t < series.t; ++t) {
    double mass = 0.0;
    for (std::size_t j = 0; j < plane; ++j) mass += series.values[t * plane + j];
    lo = t == 0 ? mass : std::min(lo, mass);
    hi = t == 0 ? mass : std::max(hi, mass);
    mean += mass / static_cast<double>(series.t);
  }
  std::cout << "wrote " << out << ": T=" << series.t << " H=" << series.h << " W=" << series.w
            << " seed=" << s << "\n"
            << "mass min=" << lo << " mean=" << mean << " max=" << hi << "\n";
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& data_path,
              const std::string& out, std::optional<std::uint64_t> seed) {
  const RunConfig rc = load_run_config(config_path);
  if (!rc.model) throw ConfigError("config: train requires a 'model' section");
  if (!rc.train) throw ConfigError("config: train requires a 'train' section");
  TrainConfig tc = *rc.train;
  const std::uint64_t s = seed.value_or(rc.seed);
  tc.seed = s;
  const std::size_t k = rc.model->history_k;
  if (rc.data.window_len < k + tc.n_rollout) {
    throw ConfigError("data.window_len " + std::to_string(rc.data.window_len) +
                      " is shorter than history_k + n_rollout = " +
                      std::to_string(k + tc.n_rollout));
  }
  prepare_dir(out);

  const GridSeries series = load_gsf(data_path);
  series.validate();
  rc.model->validate(series.h, series.w);

  const auto windows = make_windows(series, rc.data.window_len, k, rc.data.stride);
  DatasetSplit split = shuffle_split(windows, rc.data.n_train, rc.data.n_val, s);
  const Normalizer norm = fit_normalizer(split.train);
  split.train = normalize(split.train, norm);
  split.val = normalize(split.val, norm);

  TrainingState state{OperatorModel(*rc.model, series.h, series.w, s),
                      tc,
                      {},
                      0,
                      norm,
                      s,
                      s,
                      {}};
  state.adam = AdamState::zeros_like(state.model.parameters());

  const std::string label = run_label(rc.model->flavor, tc.n_rollout);
  std::cout << label << ": " << state.model.parameter_count() << " parameters, "
            << split.train.size() << " train / " << split.val.size() << " val windows\n";
  TrainHooks hooks;
  hooks.checkpoint_dir = out;
  hooks.on_epoch = [](std::size_t epoch, double train_loss, double val_loss) {
    std::printf("epoch %zu train %.6g val %.6g\n", epoch + 1, train_loss, val_loss);
    std::fflush(stdout);
  };
  train(state, split, hooks);

  save_checkpoint(state, join(out, "final.aoc"));
  state.history.write_csv(join(out, "loss.csv"));
  std::cout << "wrote " << join(out, "final.aoc") << "\n";
  return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& data_path, std::size_t horizon,
             const std::string& out) {
  if (horizon < 1) throw ConfigError("--horizon must be >= 1");
  prepare_dir(out);
  const TrainingState state = load_checkpoint(checkpoint);
  const GridSeries series = load_gsf(data_path);
  series.validate();
  const OperatorModel& model = state.model;
  const std::size_t k = model.config().history_k;
  const Forecaster forecaster = grid_forecaster(model, series.h, series.w);
  const std::string label = run_label(model.config().flavor, state.train.n_rollout);

  // Metrics are reported in normalized units, the scale the models train on.
  const auto windows = normalize(make_windows(series, k + horizon, k, 1), state.normalizer);
  const ErrorEvolution evolution = evaluate_rollout(forecaster, windows, horizon);

  EvaluationReport report;
  report.table.add(label, 1, evolution);
  if (horizon > 1) report.table.add(label, horizon, evolution);
  report.evolutions.emplace_back(label, evolution);
  render_outputs(report, out);

  // One-step predictions for every frame with a full history, in physical
  // units, aligned with the matching truth frames.
  if (series.t > k) {
    const std::size_t n = series.t - k;
    const std::size_t plane = series.h * series.w;
    std::vector<double> pred(n * plane);
    const Tensor all = state.normalizer.apply(series.frames(0, series.t));
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> hist(all.values().begin() + static_cast<std::ptrdiff_t>(i * plane),
                               all.values().begin() +
                                   static_cast<std::ptrdiff_t>((i + k) * plane));
      Tensor y = state.normalizer.invert(
          forecaster(Tensor::real({k, series.h, series.w}, std::move(hist)), 1));
      std::copy(y.values().begin(), y.values().end(),
                pred.begin() + static_cast<std::ptrdiff_t>(i * plane));
    }
    std::vector<std::int64_t> ts(series.timestamps.begin() + static_cast<std::ptrdiff_t>(k),
                                 series.timestamps.end());
    save_gsf(series_from_frames(series.frames(k, n), ts, series.georef), join(out, "truth.gsf"));
    save_gsf(series_from_frames(Tensor::real({n, series.h, series.w}, std::move(pred)), ts,
                                series.georef),
             join(out, "prediction.gsf"));
  }
  const Json manifest{{"label", label},
                      {"history_k", k},
                      {"horizon", horizon},
                      {"samples", windows.size()},
                      {"units", "normalized"}};
  write_text_file(join(out, "eval.json"), manifest.dump(2) + "\n");

  std::cout << report.table.to_csv();
  return 0;
}

int cmd_forecast(const std::string& checkpoint, const std::string& history_path,
                 std::size_t steps, const std::string& out) {
  if (steps < 1) throw ConfigError("--steps must be >= 1");
  prepare_parent(out);
  const TrainingState state = load_checkpoint(checkpoint);
  const GridSeries history = load_gsf(history_path);
  history.validate();
  const std::size_t k = state.model.config().history_k;
  if (history.t < k) {
    throw DataError("history has " + std::to_string(history.t) + " frames; the model needs " +
                    std::to_string(k));
  }
  const Forecaster forecaster = grid_forecaster(state.model, history.h, history.w);
  const Tensor window = state.normalizer.apply(history.frames(history.t - k, k));
  const Tensor pred = state.normalizer.invert(forecaster(window, steps));

  std::vector<std::int64_t> ts(steps);
  const std::int64_t last = history.timestamps.back();
  for (std::size_t i = 0; i < steps; ++i) ts[i] = last + 3600 * static_cast<std::int64_t>(i + 1);
  save_gsf(series_from_frames(pred, std::move(ts), history.georef), out);
  std::cout << "wrote " << out << ": " << steps << " frames\n";
  return 0;
}

std::vector<GridPoint> parse_points(const std::string& spec) {
  std::vector<GridPoint> points;
  std::stringstream all(spec);
  std::string item;
  while (std::getline(all, item, ';')) {
    if (item.empty()) continue;
    GridPoint p;
    char comma = 0;
    std::istringstream in(item);
    if (!(in >> p.row >> comma >> p.col) || comma != ',' || !(in >> std::ws).eof()) {
      throw ConfigError("--points: cannot parse '" + item + "' (expected r,c)");
    }
    points.push_back(p);
  }
  return points;
}

int cmd_report(const std::string& eval_dir, const std::string& points_spec,
               const std::string& out, std::size_t top_k, std::optional<int> hour) {
  const std::vector<GridPoint> points = parse_points(points_spec);
  if (hour && (*hour < 0 || *hour > 23)) throw ConfigError("--hour must lie in [0, 23]");
  prepare_dir(out);
  const Json manifest = parse_json_file(join(eval_dir, "eval.json"));
  const std::string label = manifest.at("label").get<std::string>();
  const GridSeries truth = load_gsf(join(eval_dir, "truth.gsf"));
  const GridSeries pred = load_gsf(join(eval_dir, "prediction.gsf"));
  if (truth.t != pred.t || truth.h != pred.h || truth.w != pred.w ||
      truth.timestamps != pred.timestamps) {
    throw ShapeError("truth.gsf and prediction.gsf are not aligned");
  }

  EvaluationReport report;
  std::vector<PointSeries> series;
  for (const GridPoint& p : points) {
    if (p.row >= truth.h || p.col >= truth.w) {
      throw ShapeError("point (" + std::to_string(p.row) + "," + std::to_string(p.col) +
                       ") outside the " + std::to_string(truth.h) + "x" +
                       std::to_string(truth.w) + " grid");
    }
    PointSeries ps;
    ps.point = p;
    ps.timestamps = truth.timestamps;
    for (std::size_t t = 0; t < truth.t; ++t) {
      ps.observed.push_back(truth.at(t, p.row, p.col));
      ps.predicted.push_back(pred.at(t, p.row, p.col));
    }
    const auto [lo, hi] = std::minmax_element(ps.observed.begin(), ps.observed.end());
    ps.r2 = *lo == *hi ? std::nan("") : r2(ps.observed, ps.predicted);
    ps.rmse = rmse(ps.observed, ps.predicted);
    ps.mae = mae(ps.observed, ps.predicted);
    std::printf("point (%zu,%zu): r2 %.6f rmse %.6g mae %.6g\n", p.row, p.col, ps.r2, ps.rmse,
                ps.mae);
    series.push_back(std::move(ps));
  }
  if (!series.empty()) report.points.emplace_back(label, std::move(series));

  report.events = extreme_events(truth, top_k, hour);
  const std::size_t plane = truth.h * truth.w;
  for (ExtremeEvent& e : report.events) {
    Tensor p = pred.frames(e.index, 1).reshaped({truth.h, truth.w});
    std::vector<double> err(plane);
    for (std::size_t j = 0; j < plane; ++j) {
      err[j] = std::abs(p.values()[j] - e.truth.values()[j]);
    }
    e.abs_error = Tensor::real({truth.h, truth.w}, std::move(err));
    e.prediction = std::move(p);
    std::printf("event: index %zu timestamp %lld spatial sum %.6g\n", e.index,
                static_cast<long long>(e.timestamp), e.spatial_sum);
  }
  render_outputs(report, out);
  return 0;
}

template <typename F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const UnsupportedError& e) {
    std::cerr << "unsupported: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural operator surrogates for gridded air-quality fields"};
  app.require_subcommand(1);

  std::string config, data, out, checkpoint, history, eval_dir, points;
  std::uint64_t seed_value = 0;
  std::size_t horizon = 1, steps = 1, top_k = 1;
  int hour_value = -1;

  auto* gen = app.add_subcommand("gen-data", "Simulate a synthetic scenario to a GSF file");
  gen->add_option("--config", config, "Run config (JSON)")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", out, "Output GSF path")->required();
  auto* gen_seed = gen->add_option("--seed", seed_value, "Seed; overrides config.seed");

  auto* tr = app.add_subcommand("train", "Train a model on a GSF series");
  tr->add_option("--config", config, "Run config (JSON)")->required()->check(CLI::ExistingFile);
  tr->add_option("--data", data, "Training series (GSF)")->required()->check(CLI::ExistingFile);
  tr->add_option("--out", out, "Output directory")->required();
  auto* tr_seed = tr->add_option("--seed", seed_value, "Seed; overrides config.seed");

  auto* ev = app.add_subcommand("eval", "Score autoregressive rollouts against a series");
  ev->add_option("--checkpoint", checkpoint, "Checkpoint (AOC)")
      ->required()
      ->check(CLI::ExistingFile);
  ev->add_option("--data", data, "Evaluation series (GSF)")->required()->check(CLI::ExistingFile);
  ev->add_option("--horizon", horizon, "Rollout steps")->required();
  ev->add_option("--out", out, "Output directory")->required();

  auto* fc = app.add_subcommand("forecast", "Forecast from the last frames of a history");
  fc->add_option("--checkpoint", checkpoint, "Checkpoint (AOC)")
      ->required()
      ->check(CLI::ExistingFile);
  fc->add_option("--history", history, "History series (GSF)")
      ->required()
      ->check(CLI::ExistingFile);
  fc->add_option("--steps", steps, "Forecast steps")->required();
  fc->add_option("--out", out, "Output GSF path")->required();

  auto* rp = app.add_subcommand("report", "Point series, parity and extreme events");
  rp->add_option("--eval-dir", eval_dir, "Directory written by eval")
      ->required()
      ->check(CLI::ExistingDirectory);
  rp->add_option("--points", points, "Grid points \"r,c;r,c\"")->default_val("");
  rp->add_option("--out", out, "Output directory")->required();
  rp->add_option("--top-k", top_k, "Number of extreme events")->default_val(1);
  auto* rp_hour = rp->add_option("--hour", hour_value, "Restrict events to one UTC hour");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  auto opt_seed = [&](CLI::Option* o) -> std::optional<std::uint64_t> {
    return o->count() > 0 ? std::optional<std::uint64_t>(seed_value) : std::nullopt;
  };
  if (gen->parsed()) return guarded([&] { return cmd_gen_data(config, out, opt_seed(gen_seed)); });
  if (tr->parsed()) {
    return guarded([&] { return cmd_train(config, data, out, opt_seed(tr_seed)); });
  }
  if (ev->parsed()) return guarded([&] { return cmd_eval(checkpoint, data, horizon, out); });
  if (fc->parsed()) return guarded([&] { return cmd_forecast(checkpoint, history, steps, out); });
  if (rp->parsed()) {
    std::optional<int> hour;
    if (rp_hour->count() > 0) hour = hour_value;
    return guarded([&] { return cmd_report(eval_dir, points, out, top_k, hour); });
  }
  return 1;
}
