// Copyright 2026 The aeroop Authors
// SPDX-License-Identifier: Apache-2.0

#include "aeroop/config.hpp"

#include <fstream>
#include <sstream>

#include "aeroop/error.hpp"

namespace aeroop {

StrictObject::StrictObject(const Json& json, std::string section)
    : json_(&json), section_(std::move(section)) {
  if (!json.is_object()) throw ConfigError(section_ + ": expected a JSON object");
}

const Json& StrictObject::get(const std::string& key) {
  used_.insert(key);
  return json_->at(key);
}

double StrictObject::number(const std::string& key, double fallback) {
  if (!has(key)) return fallback;
  const Json& v = get(key);
  if (!v.is_number()) throw ConfigError(section_ + "." + key + ": expected a number");
  return v.get<double>();
}

std::size_t StrictObject::count(const std::string& key, std::size_t fallback) {
  if (!has(key)) return fallback;
  const Json& v = get(key);
  if (!v.is_number_unsigned()) {
    throw ConfigError(section_ + "." + key + ": expected a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::uint64_t StrictObject::u64(const std::string& key, std::uint64_t fallback) {
  if (!has(key)) return fallback;
  const Json& v = get(key);
  if (!v.is_number_unsigned()) {
    throw ConfigError(section_ + "." + key + ": expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::int64_t StrictObject::i64(const std::string& key, std::int64_t fallback) {
  if (!has(key)) return fallback;
  const Json& v = get(key);
  if (!v.is_number_integer()) throw ConfigError(section_ + "." + key + ": expected an integer");
  return v.get<std::int64_t>();
}

bool StrictObject::boolean(const std::string& key, bool fallback) {
  if (!has(key)) return fallback;
  const Json& v = get(key);
  if (!v.is_boolean()) throw ConfigError(section_ + "." + key + ": expected true or false");
  return v.get<bool>();
}

std::string StrictObject::text(const std::string& key, const std::string& fallback) {
  if (!has(key)) return fallback;
  const Json& v = get(key);
  if (!v.is_string()) throw ConfigError(section_ + "." + key + ": expected a string");
  return v.get<std::string>();
}

const Json& StrictObject::child(const std::string& key) {
  if (!has(key)) throw ConfigError(section_ + ": missing required key '" + key + "'");
  return get(key);
}

void StrictObject::finish() const {
  for (const auto& item : json_->items()) {
    if (used_.count(item.key()) == 0) {
      throw ConfigError(section_ + ": unknown key '" + item.key() + "'");
    }
  }
}

Json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(origin + ": invalid JSON: " + e.what());
  }
}

Json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str(), path);
}

ModelConfig model_config_from_json(const Json& json) {
  StrictObject o(json, "model");
  ModelConfig c;
  c.flavor = parse_flavor(o.text("flavor", flavor_name(c.flavor)));
  c.history_k = o.count("history_k", c.history_k);
  c.modes = o.count("modes", c.modes);
  c.width = o.count("width", c.width);
  c.n_layers = o.count("n_layers", c.n_layers);
  c.projection_hidden = o.count("projection_hidden", c.projection_hidden);
  c.append_coords = o.boolean("append_coords", c.append_coords);
  c.activation = parse_activation(o.text("activation", activation_name(c.activation)));
  o.finish();
  return c;
}

Json to_json(const ModelConfig& c) {
  return Json{{"flavor", flavor_name(c.flavor)},
              {"history_k", c.history_k},
              {"modes", c.modes},
              {"width", c.width},
              {"n_layers", c.n_layers},
              {"projection_hidden", c.projection_hidden},
              {"append_coords", c.append_coords},
              {"activation", activation_name(c.activation)}};
}

TrainConfig train_config_from_json(const Json& json) {
  StrictObject o(json, "train");
  TrainConfig c;
  c.epochs = o.count("epochs", c.epochs);
  c.lr0 = o.number("lr0", c.lr0);
  c.halve_every = o.count("halve_every", c.halve_every);
  c.n_rollout = o.count("n_rollout", c.n_rollout);
  c.batch_size = o.count("batch_size", c.batch_size);
  c.beta1 = o.number("beta1", c.beta1);
  c.beta2 = o.number("beta2", c.beta2);
  c.eps = o.number("eps", c.eps);
  c.seed = o.u64("seed", c.seed);
  c.checkpoint_every = o.count("checkpoint_every", c.checkpoint_every);
  c.detach_rollout = o.boolean("detach_rollout", c.detach_rollout);
  o.finish();
  c.validate();
  return c;
}

Json to_json(const TrainConfig& c) {
  return Json{{"epochs", c.epochs},
              {"lr0", c.lr0},
              {"halve_every", c.halve_every},
              {"n_rollout", c.n_rollout},
              {"batch_size", c.batch_size},
              {"beta1", c.beta1},
              {"beta2", c.beta2},
              {"eps", c.eps},
              {"seed", c.seed},
              {"checkpoint_every", c.checkpoint_every},
              {"detach_rollout", c.detach_rollout}};
}

namespace {

Boundary parse_boundary(const std::string& s) {
  if (s == "periodic") return Boundary::kPeriodic;
  if (s == "outflow") return Boundary::kOutflow;
  throw ConfigError("sim.boundary: unknown value '" + s + "' (expected periodic or outflow)");
}

VelocityKind parse_velocity_kind(const std::string& s) {
  if (s == "constant") return VelocityKind::kConstant;
  if (s == "stream") return VelocityKind::kStream;
  throw ConfigError("sim.velocity.kind: unknown value '" + s + "' (expected constant or stream)");
}

}  // namespace

SimConfig sim_config_from_json(const Json& json) {
  StrictObject o(json, "sim");
  SimConfig c;
  c.h = o.count("h", c.h);
  c.w = o.count("w", c.w);
  c.dx = o.number("dx", c.dx);
  c.dt = o.number("dt", c.dt);
  c.substeps = o.count("substeps", c.substeps);
  c.diffusivity = o.number("diffusivity", c.diffusivity);
  c.decay = o.number("decay", c.decay);
  c.boundary = parse_boundary(o.text("boundary", "periodic"));
  c.spinup_hours = o.number("spinup_hours", c.spinup_hours);
  c.start_timestamp = o.i64("start_timestamp", c.start_timestamp);
  if (o.has("velocity")) {
    StrictObject v(o.child("velocity"), "sim.velocity");
    c.velocity.kind = parse_velocity_kind(v.text("kind", "constant"));
    c.velocity.u = v.number("u", c.velocity.u);
    c.velocity.v = v.number("v", c.velocity.v);
    c.velocity.max_speed = v.number("max_speed", c.velocity.max_speed);
    c.velocity.gyre_weight = v.number("gyre_weight", c.velocity.gyre_weight);
    c.velocity.random_modes = v.count("random_modes", c.velocity.random_modes);
    c.velocity.correlation_hours = v.number("correlation_hours", c.velocity.correlation_hours);
    v.finish();
  }
  if (o.has("sources")) {
    const Json& list = o.child("sources");
    if (!list.is_array()) throw ConfigError("sim.sources: expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      StrictObject s(list[i], "sim.sources[" + std::to_string(i) + "]");
      Source src;
      src.row = s.count("row", 0);
      src.col = s.count("col", 0);
      src.base = s.number("base", src.base);
      src.amplitude = s.number("amplitude", src.amplitude);
      src.phase = s.number("phase", src.phase);
      s.finish();
      c.sources.push_back(src);
    }
  }
  o.finish();
  c.validate();
  return c;
}

Json to_json(const SimConfig& c) {
  Json sources = Json::array();
  for (const auto& s : c.sources) {
    sources.push_back(Json{{"row", s.row},
                           {"col", s.col},
                           {"base", s.base},
                           {"amplitude", s.amplitude},
                           {"phase", s.phase}});
  }
  return Json{
      {"h", c.h},
      {"w", c.w},
      {"dx", c.dx},
      {"dt", c.dt},
      {"substeps", c.substeps},
      {"diffusivity", c.diffusivity},
      {"decay", c.decay},
      {"boundary", c.boundary == Boundary::kPeriodic ? "periodic" : "outflow"},
      {"spinup_hours", c.spinup_hours},
      {"start_timestamp", c.start_timestamp},
      {"velocity",
       Json{{"kind", c.velocity.kind == VelocityKind::kConstant ? "constant" : "stream"},
            {"u", c.velocity.u},
            {"v", c.velocity.v},
            {"max_speed", c.velocity.max_speed},
            {"gyre_weight", c.velocity.gyre_weight},
            {"random_modes", c.velocity.random_modes},
            {"correlation_hours", c.velocity.correlation_hours}}},
      {"sources", sources}};
}

}  // namespace aeroop
