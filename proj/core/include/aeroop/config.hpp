// Copyright 2026 The aeroop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "aeroop/model.hpp"
#include "aeroop/synth.hpp"
#include "aeroop/training.hpp"

namespace aeroop {

using Json = nlohmann::json;

/// Reads fields of one JSON object and rejects keys that were never asked
/// for. Every accessor throws ConfigError naming the section and key.
class StrictObject {
 public:
  StrictObject(const Json& json, std::string section);

  bool has(const std::string& key) const { return json_->contains(key); }
  double number(const std::string& key, double fallback);
  std::size_t count(const std::string& key, std::size_t fallback);
  std::uint64_t u64(const std::string& key, std::uint64_t fallback);
  std::int64_t i64(const std::string& key, std::int64_t fallback);
  bool boolean(const std::string& key, bool fallback);
  std::string text(const std::string& key, const std::string& fallback);
  /// Required sub-object or array; marks the key as consumed.
  const Json& child(const std::string& key);
  /// Throws ConfigError if any key was not consumed.
  void finish() const;

 private:
  const Json& get(const std::string& key);

  const Json* json_;
  std::string section_;
  std::set<std::string> used_;
};

Json parse_json_file(const std::string& path);
Json parse_json_text(const std::string& text, const std::string& origin);

ModelConfig model_config_from_json(const Json& json);
Json to_json(const ModelConfig& config);
TrainConfig train_config_from_json(const Json& json);
Json to_json(const TrainConfig& config);
SimConfig sim_config_from_json(const Json& json);
Json to_json(const SimConfig& config);

}  // namespace aeroop
