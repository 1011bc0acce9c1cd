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

// Risk stratification and per-user report documents. Total probability is
// mapped onto four bands (half-open below, so a boundary value lands in the
// higher band) and each band carries an operator-editable guidance text.

#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include "fogtrace/core.hpp"
#include "fogtrace/errors.hpp"
#include "fogtrace/util.hpp"
#include "json.hpp"

namespace fogtrace {

enum class RiskLevel : int { kLow = 0, kModerate = 1, kHigh = 2, kVeryHigh = 3 };

inline const char* to_string(RiskLevel level) {
  switch (level) {
    case RiskLevel::kLow: return "low";
    case RiskLevel::kModerate: return "moderate";
    case RiskLevel::kHigh: return "high";
    case RiskLevel::kVeryHigh: return "very_high";
  }
  throw std::domain_error("invalid risk level");
}

inline RiskLevel risk_level_from_string(std::string_view text) {
  if (text == "low") return RiskLevel::kLow;
  if (text == "moderate") return RiskLevel::kModerate;
  if (text == "high") return RiskLevel::kHigh;
  if (text == "very_high") return RiskLevel::kVeryHigh;
  throw DataError("unknown risk level: '" + std::string(text) + "'");
}

// The three cut points partitioning [0, 1] into four bands.
class RiskBands {
 public:
  RiskBands(Probability p_low, Probability p_avg, Probability p_high)
      : p_low_(p_low), p_avg_(p_avg), p_high_(p_high) {
    if (!(0.0 < p_low_.value() && p_low_.value() < p_avg_.value() &&
          p_avg_.value() < p_high_.value() && p_high_.value() <= 1.0))
      throw ConfigError("risk bands must satisfy 0 < low < avg < high <= 1");
  }

  // Top band starts at 0.9 so "very high" coincides with the default
  // infection threshold.
  static RiskBands defaults() {
    return RiskBands(Probability(0.3), Probability(0.6), Probability(0.9));
  }

  Probability p_low() const noexcept { return p_low_; }
  Probability p_avg() const noexcept { return p_avg_; }
  Probability p_high() const noexcept { return p_high_; }

 private:
  Probability p_low_, p_avg_, p_high_;
};

inline RiskLevel infection_level(Probability total, const RiskBands& bands) {
  const double p = total.value();
  if (p < bands.p_low().value()) return RiskLevel::kLow;
  if (p < bands.p_avg().value()) return RiskLevel::kModerate;
  if (p < bands.p_high().value()) return RiskLevel::kHigh;
  return RiskLevel::kVeryHigh;
}

// Guidance texts keyed by level. Loaded from a plain key=value file
// (one line per level, '#' comments) so health guidance is editable
// without a rebuild.
class GuidanceTable {
 public:
  static GuidanceTable from_map(std::map<RiskLevel, std::string> texts) {
    GuidanceTable table;
    table.texts_ = std::move(texts);
    table.validate();
    return table;
  }

  static GuidanceTable load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open guidance file: " + path);
    GuidanceTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::string_view v = detail::trim(line);
      if (v.empty() || v.front() == '#') continue;
      const auto eq = v.find('=');
      if (eq == std::string_view::npos)
        throw ParseError("guidance line is not key=text", line_no);
      const RiskLevel level = risk_level_from_string(detail::trim(v.substr(0, eq)));
      const std::string_view text = detail::trim(v.substr(eq + 1));
      if (text.empty()) throw ParseError("guidance text is empty", line_no);
      if (!table.texts_.emplace(level, std::string(text)).second)
        throw ParseError("duplicate guidance level", line_no);
    }
    table.validate();
    return table;
  }

  const std::string& text_for(RiskLevel level) const { return texts_.at(level); }

 private:
  void validate() const {
    for (RiskLevel level : {RiskLevel::kLow, RiskLevel::kModerate, RiskLevel::kHigh,
                            RiskLevel::kVeryHigh}) {
      auto it = texts_.find(level);
      if (it == texts_.end() || it->second.empty())
        throw ConfigError(std::string("guidance table is missing level '") +
                          to_string(level) + "'");
    }
  }

  std::map<RiskLevel, std::string> texts_;
};

// Per-user risk document sent to the user and synced to the cloud sink.
struct Report {
  std::string user_id;
  RiskLevel level = RiskLevel::kLow;
  Probability total_probability{};
  SymptomFlag symptom{};
  std::uint32_t traced_count = 0;
  std::string guidance;
  std::int64_t issued_at = 0;  // UTC seconds

  friend bool operator==(const Report&, const Report&) = default;
};

inline Report build_report(const UserState& state, RiskLevel level,
                           const GuidanceTable& guidance, std::string user_id,
                           std::int64_t issued_at) {
  return Report{
      .user_id = std::move(user_id),
      .level = level,
      .total_probability = state.total_probability,
      .symptom = state.symptom,
      .traced_count = state.traced_count,
      .guidance = guidance.text_for(level),
      .issued_at = issued_at,
  };
}

// Stable wire schema; field names are part of the service contract.
inline nlohmann::json report_to_json(const Report& report) {
  return nlohmann::json{
      {"user_id", report.user_id},
      {"level", to_string(report.level)},
      {"total_probability", report.total_probability.value()},
      {"symptom", report.symptom.value()},
      {"traced_count", report.traced_count},
      {"guidance", report.guidance},
      {"issued_at", report.issued_at},
  };
}

inline Report report_from_json(const nlohmann::json& j) {
  return Report{
      .user_id = j.at("user_id").get<std::string>(),
      .level = risk_level_from_string(j.at("level").get<std::string>()),
      .total_probability = Probability(j.at("total_probability").get<double>()),
      .symptom = symptom_flag_from_int(j.at("symptom").get<int>()),
      .traced_count = j.at("traced_count").get<std::uint32_t>(),
      .guidance = j.at("guidance").get<std::string>(),
      .issued_at = j.at("issued_at").get<std::int64_t>(),
  };
}

}  // namespace fogtrace
