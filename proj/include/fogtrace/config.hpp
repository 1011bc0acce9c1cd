// Copyright 2026 The Fogtrace Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// JSON config plumbing: simulation configs, the eight bundled experiment
// presets, and the fog-service config with environment overrides.

#pragma once

#include <array>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <string>

#include "fogtrace/core.hpp"
#include "fogtrace/errors.hpp"
#include "fogtrace/risk.hpp"
#include "fogtrace/simulation.hpp"
#include "json.hpp"

namespace fogtrace {

namespace detail {

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("invalid JSON in " + path + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object: " + path);
  return j;
}

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) {
    try {
      out = it->get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
  }
}

}  // namespace detail

// Accepts either tau0_s or tau0_min (minutes are converted at load; both
// present is an error). Missing fields keep their defaults; sampling ranges
// default relative to the resolved tau0.
inline SimulationConfig simulation_config_from_json(const nlohmann::json& j) {
  SimulationConfig config;
  detail::read_field(j, "population", config.population);
  detail::read_field(j, "days", config.days);

  double theta = config.thresholds.theta().value();
  double tau0_s = config.thresholds.tau0_s();
  double nu0_dbm = config.thresholds.nu0_dbm();
  detail::read_field(j, "theta", theta);
  if (j.contains("tau0_s") && j.contains("tau0_min"))
    throw ConfigError("specify tau0_s or tau0_min, not both");
  detail::read_field(j, "tau0_s", tau0_s);
  if (j.contains("tau0_min")) {
    double minutes = 0.0;
    detail::read_field(j, "tau0_min", minutes);
    tau0_s = minutes * 60.0;
  }
  detail::read_field(j, "nu0_dbm", nu0_dbm);
  try {
    config.thresholds = Thresholds(Probability(theta), tau0_s, nu0_dbm);
  } catch (const std::domain_error& e) {
    throw ConfigError(std::string("invalid thresholds: ") + e.what());
  }

  detail::read_field(j, "meetups_per_day", config.meetups_per_day);
  detail::read_field(j, "initial_infected", config.initial_infected);
  detail::read_field(j, "daily_symptom_rate", config.daily_symptom_rate);
  detail::read_field(j, "rng_seed", config.rng_seed);
  detail::read_field(j, "alert_compliance", config.alert_compliance);

  config.contact_time_range_s = default_contact_time_range(config.thresholds);
  config.signal_range_dbm = default_signal_range();
  if (auto it = j.find("contact_time_range_s"); it != j.end()) {
    if (!it->is_array() || it->size() != 2)
      throw ConfigError("contact_time_range_s must be [min, max]");
    config.contact_time_range_s = {it->at(0).get<double>(), it->at(1).get<double>()};
  }
  if (auto it = j.find("signal_range_dbm"); it != j.end()) {
    if (!it->is_array() || it->size() != 2)
      throw ConfigError("signal_range_dbm must be [min, max]");
    config.signal_range_dbm = {it->at(0).get<double>(), it->at(1).get<double>()};
  }

  config.validate();
  return config;
}

inline SimulationConfig load_simulation_config(const std::string& path) {
  return simulation_config_from_json(detail::load_json_file(path));
}

inline nlohmann::json simulation_config_to_json(const SimulationConfig& config) {
  return nlohmann::json{
      {"population", config.population},
      {"days", config.days},
      {"theta", config.thresholds.theta().value()},
      {"tau0_s", config.thresholds.tau0_s()},
      {"nu0_dbm", config.thresholds.nu0_dbm()},
      {"meetups_per_day", config.meetups_per_day},
      {"initial_infected", config.initial_infected},
      {"daily_symptom_rate", config.daily_symptom_rate},
      {"contact_time_range_s", {config.contact_time_range_s.min, config.contact_time_range_s.max}},
      {"signal_range_dbm", {config.signal_range_dbm.min, config.signal_range_dbm.max}},
      {"rng_seed", config.rng_seed},
      {"alert_compliance", config.alert_compliance},
  };
}

// Bundled experiment presets: four Pinal-style and four Maricopa-style
// parameter rows, each pairing two meetup rates over a 15-day window.
struct CasePreset {
  int id;
  const char* dataset;
  double theta;
  double tau0_min;
  double nu0_dbm;
  std::array<std::uint32_t, 2> meetups_per_day;
  std::uint32_t initial_infected;  // day-1 new cases of the matching dataset
};

inline constexpr std::array<CasePreset, 8> kCasePresets{{
    {1, "pinal", 0.9, 2.0, -0.55, {1225, 1250}, 10},
    {2, "pinal", 0.9, 2.0, -0.55, {1275, 1300}, 10},
    {3, "pinal", 0.9, 1.0, -0.50, {1225, 1250}, 10},
    {4, "pinal", 0.9, 1.0, -0.50, {1275, 1300}, 10},
    {5, "maricopa", 0.9, 2.0, -0.55, {2300, 2330}, 8},
    {6, "maricopa", 0.9, 2.0, -0.55, {2345, 2360}, 8},
    {7, "maricopa", 0.9, 1.0, -0.50, {2300, 2330}, 8},
    {8, "maricopa", 0.9, 1.0, -0.50, {2345, 2500}, 8},
}};

inline const CasePreset& case_preset(int case_id) {
  if (case_id < 1 || case_id > 8)
    throw ConfigError("case must be between 1 and 8, got " + std::to_string(case_id));
  return kCasePresets[static_cast<std::size_t>(case_id - 1)];
}

// Materializes one meetup-rate variant (0 or 1) of a preset.
inline SimulationConfig config_for_case(int case_id, std::size_t variant,
                                        std::uint64_t rng_seed) {
  const CasePreset& preset = case_preset(case_id);
  if (variant >= preset.meetups_per_day.size())
    throw ConfigError("case preset has two meetup variants, got index " +
                      std::to_string(variant));
  SimulationConfig config;
  config.population = 10000;
  config.days = 15;
  config.thresholds =
      Thresholds(Probability(preset.theta), preset.tau0_min * 60.0, preset.nu0_dbm);
  config.meetups_per_day = preset.meetups_per_day[variant];
  config.initial_infected = preset.initial_infected;
  config.daily_symptom_rate = 0.0;
  config.contact_time_range_s = default_contact_time_range(config.thresholds);
  config.signal_range_dbm = default_signal_range();
  config.rng_seed = rng_seed;
  config.validate();
  return config;
}

struct SinkConfig {
  std::string kind = "file";  // "file" or "http"
  std::string path = "reports_sync.ndjson";
  std::string url;  // http sink endpoint
};

struct ServiceConfig {
  int port = 8080;
  Thresholds thresholds{Probability(0.9), 120.0, -0.55};
  RiskBands bands = RiskBands::defaults();
  std::string guidance_path = "data/guidance.txt";
  SinkConfig sink;
  int cycle_interval_s = 60;  // 0 disables the periodic cycle timer
  std::string snapshot_path = "fogtrace_snapshot.fts";
};

inline ServiceConfig service_config_from_json(const nlohmann::json& j) {
  ServiceConfig config;
  detail::read_field(j, "port", config.port);

  double theta = config.thresholds.theta().value();
  double tau0_s = config.thresholds.tau0_s();
  double nu0_dbm = config.thresholds.nu0_dbm();
  detail::read_field(j, "theta", theta);
  detail::read_field(j, "tau0_s", tau0_s);
  if (j.contains("tau0_min")) {
    double minutes = 0.0;
    detail::read_field(j, "tau0_min", minutes);
    tau0_s = minutes * 60.0;
  }
  detail::read_field(j, "nu0_dbm", nu0_dbm);
  try {
    config.thresholds = Thresholds(Probability(theta), tau0_s, nu0_dbm);
  } catch (const std::domain_error& e) {
    throw ConfigError(std::string("invalid thresholds: ") + e.what());
  }

  if (auto it = j.find("bands"); it != j.end()) {
    double low = 0.3, avg = 0.6, high = 0.9;
    detail::read_field(*it, "p_low", low);
    detail::read_field(*it, "p_avg", avg);
    detail::read_field(*it, "p_high", high);
    try {
      config.bands = RiskBands(Probability(low), Probability(avg), Probability(high));
    } catch (const std::domain_error& e) {
      throw ConfigError(std::string("invalid bands: ") + e.what());
    }
  }

  detail::read_field(j, "guidance_path", config.guidance_path);
  detail::read_field(j, "cycle_interval_s", config.cycle_interval_s);
  detail::read_field(j, "snapshot_path", config.snapshot_path);
  if (auto it = j.find("sink"); it != j.end()) {
    detail::read_field(*it, "kind", config.sink.kind);
    detail::read_field(*it, "path", config.sink.path);
    detail::read_field(*it, "url", config.sink.url);
    if (config.sink.kind != "file" && config.sink.kind != "http")
      throw ConfigError("sink.kind must be 'file' or 'http'");
    if (config.sink.kind == "http" && config.sink.url.empty())
      throw ConfigError("http sink requires sink.url");
  }
  if (config.cycle_interval_s < 0) throw ConfigError("cycle_interval_s must be >= 0");
  if (config.port < 0 || config.port > 65535) throw ConfigError("port must be in [0, 65535]");
  return config;
}

inline ServiceConfig load_service_config(const std::string& path) {
  return service_config_from_json(detail::load_json_file(path));
}

// Environment overrides, applied on top of the file:
//   FOGTRACE_PORT, FOGTRACE_THETA, FOGTRACE_TAU0_S, FOGTRACE_NU0_DBM,
//   FOGTRACE_P_LOW, FOGTRACE_P_AVG, FOGTRACE_P_HIGH,
//   FOGTRACE_SINK_URL (switches the sink to http), FOGTRACE_CYCLE_INTERVAL_S
inline void apply_env_overrides(ServiceConfig& config) {
  auto env = [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (v == nullptr || *v == '\0') return std::nullopt;
    return std::string(v);
  };
  auto parse_double = [](const std::string& name, const std::string& raw) {
    try {
      std::size_t used = 0;
      const double v = std::stod(raw, &used);
      if (used != raw.size()) throw std::invalid_argument(raw);
      return v;
    } catch (const std::exception&) {
      throw ConfigError(name + " is not a number: '" + raw + "'");
    }
  };

  if (auto v = env("FOGTRACE_PORT")) {
    const double port = parse_double("FOGTRACE_PORT", *v);
    if (port < 0 || port > 65535 || port != static_cast<int>(port))
      throw ConfigError("FOGTRACE_PORT must be an integer in [0, 65535]");
    config.port = static_cast<int>(port);
  }

  double theta = config.thresholds.theta().value();
  double tau0_s = config.thresholds.tau0_s();
  double nu0_dbm = config.thresholds.nu0_dbm();
  bool thresholds_changed = false;
  if (auto v = env("FOGTRACE_THETA")) theta = parse_double("FOGTRACE_THETA", *v), thresholds_changed = true;
  if (auto v = env("FOGTRACE_TAU0_S")) tau0_s = parse_double("FOGTRACE_TAU0_S", *v), thresholds_changed = true;
  if (auto v = env("FOGTRACE_NU0_DBM")) nu0_dbm = parse_double("FOGTRACE_NU0_DBM", *v), thresholds_changed = true;
  if (thresholds_changed) {
    try {
      config.thresholds = Thresholds(Probability(theta), tau0_s, nu0_dbm);
    } catch (const std::domain_error& e) {
      throw ConfigError(std::string("invalid thresholds from environment: ") + e.what());
    }
  }

  double low = config.bands.p_low().value();
  double avg = config.bands.p_avg().value();
  double high = config.bands.p_high().value();
  bool bands_changed = false;
  if (auto v = env("FOGTRACE_P_LOW")) low = parse_double("FOGTRACE_P_LOW", *v), bands_changed = true;
  if (auto v = env("FOGTRACE_P_AVG")) avg = parse_double("FOGTRACE_P_AVG", *v), bands_changed = true;
  if (auto v = env("FOGTRACE_P_HIGH")) high = parse_double("FOGTRACE_P_HIGH", *v), bands_changed = true;
  if (bands_changed) {
    try {
      config.bands = RiskBands(Probability(low), Probability(avg), Probability(high));
    } catch (const std::domain_error& e) {
      throw ConfigError(std::string("invalid bands from environment: ") + e.what());
    }
  }

  if (auto v = env("FOGTRACE_SINK_URL")) {
    config.sink.kind = "http";
    config.sink.url = *v;
  }
  if (auto v = env("FOGTRACE_CYCLE_INTERVAL_S")) {
    const double interval = parse_double("FOGTRACE_CYCLE_INTERVAL_S", *v);
    if (interval < 0 || interval != static_cast<int>(interval))
      throw ConfigError("FOGTRACE_CYCLE_INTERVAL_S must be a nonnegative integer");
    config.cycle_interval_s = static_cast<int>(interval);
  }
}

}  // namespace fogtrace
