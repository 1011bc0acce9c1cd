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

// Real-world daily case series, comparison metrics against simulated series
// and plot-ready CSV exports.
//
// File contracts (UTF-8, LF line endings):
//   case series   header `date,new_cases`, ISO-8601 dates, nonnegative counts
//   daily series  header `day,new_infections,cumulative`, days 1-based
//   curve export  header `day,<name>,...`, one column per series

#pragma once

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "fogtrace/errors.hpp"
#include "fogtrace/simulation.hpp"
#include "fogtrace/util.hpp"

namespace fogtrace {

// A labelled run of daily new-case counts starting at a calendar date.
struct CaseSeries {
  std::string label;
  std::vector<std::string> dates;  // ISO-8601, one per day
  std::vector<std::uint64_t> new_cases;

  const std::string& start_date() const { return dates.at(0); }
  std::size_t days() const noexcept { return new_cases.size(); }

  friend bool operator==(const CaseSeries&, const CaseSeries&) = default;
};

namespace detail {

inline std::uint64_t parse_count(std::string_view field, std::size_t line_no) {
  field = trim(field);
  if (!field.empty() && field.front() == '-')
    throw ParseError("case count must be nonnegative: '" + std::string(field) + "'", line_no);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size())
    throw ParseError("malformed count: '" + std::string(field) + "'", line_no);
  return value;
}

}  // namespace detail

inline CaseSeries load_case_series(const std::string& path, std::string label = "") {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open case series file: " + path);
  if (label.empty()) label = std::filesystem::path(path).stem().string();

  CaseSeries series;
  series.label = std::move(label);
  std::set<std::string> seen_dates;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view v = detail::trim(line);
    if (v.empty()) continue;
    if (!header_seen) {
      if (v != "date,new_cases")
        throw ParseError("expected header 'date,new_cases', got '" + std::string(v) + "'", line_no);
      header_seen = true;
      continue;
    }
    const auto comma = v.find(',');
    if (comma == std::string_view::npos) throw ParseError("row is not date,new_cases", line_no);
    const std::string date(detail::trim(v.substr(0, comma)));
    detail::parse_iso_date(date);  // validates format
    if (!seen_dates.insert(date).second) throw ParseError("duplicate date " + date, line_no);
    series.dates.push_back(date);
    series.new_cases.push_back(detail::parse_count(v.substr(comma + 1), line_no));
  }
  if (series.new_cases.empty())
    throw ParseError("case series file has no data rows: " + path, line_no);
  return series;
}

inline void save_case_series(const CaseSeries& series, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write case series file: " + path);
  out << "date,new_cases\n";
  for (std::size_t i = 0; i < series.days(); ++i)
    out << series.dates.at(i) << ',' << series.new_cases[i] << '\n';
  if (!out) throw DataError("failed writing case series file: " + path);
}

// Builds consecutive dates from a start date, for series that only know
// their day index.
inline std::vector<std::string> consecutive_dates(const std::string& start_iso, std::size_t days) {
  const auto start = std::chrono::sys_days(detail::parse_iso_date(start_iso));
  std::vector<std::string> out;
  out.reserve(days);
  for (std::size_t i = 0; i < days; ++i)
    out.push_back(detail::format_iso_date(
        std::chrono::year_month_day(start + std::chrono::days(static_cast<int>(i)))));
  return out;
}

struct ComparisonMetrics {
  double mean_absolute_error = 0.0;
  double root_mean_square_error = 0.0;
  std::int64_t total_count_delta = 0;         // sum(sim) - sum(real) over aligned days
  std::vector<std::int64_t> per_day_delta;    // sim - real
  std::size_t aligned_days = 0;
  bool truncated = false;  // lengths differed; metrics cover the overlap
};

inline ComparisonMetrics compare_series(const DailySeries& sim, const CaseSeries& real) {
  const std::size_t days = std::min(sim.days(), real.days());
  if (days == 0) throw DataError("no overlapping days to compare");
  ComparisonMetrics m;
  m.aligned_days = days;
  m.truncated = sim.days() != real.days();
  m.per_day_delta.reserve(days);
  double abs_sum = 0.0, sq_sum = 0.0;
  for (std::size_t i = 0; i < days; ++i) {
    const auto delta = static_cast<std::int64_t>(sim[i]) -
                       static_cast<std::int64_t>(real.new_cases[i]);
    m.per_day_delta.push_back(delta);
    m.total_count_delta += delta;
    abs_sum += static_cast<double>(std::abs(delta));
    sq_sum += static_cast<double>(delta) * static_cast<double>(delta);
  }
  m.mean_absolute_error = abs_sum / static_cast<double>(days);
  m.root_mean_square_error = std::sqrt(sq_sum / static_cast<double>(days));
  return m;
}

// One named column of per-day counts for the curve export.
struct NamedSeries {
  std::string name;
  std::vector<std::uint64_t> values;
};

inline void export_curves(std::span<const NamedSeries> series, std::ostream& out) {
  if (series.empty()) throw DataError("curve export needs at least one series");
  const std::size_t days = series.front().values.size();
  for (const NamedSeries& s : series)
    if (s.values.size() != days)
      throw DataError("curve export requires series aligned on day index");
  out << "day";
  for (const NamedSeries& s : series) out << ',' << s.name;
  out << '\n';
  for (std::size_t d = 0; d < days; ++d) {
    out << d + 1;
    for (const NamedSeries& s : series) out << ',' << s.values[d];
    out << '\n';
  }
}

inline void export_curves(std::span<const NamedSeries> series, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write curve file: " + path);
  export_curves(series, out);
  if (!out) throw DataError("failed writing curve file: " + path);
}

inline void write_daily_series_csv(const DailySeries& series, std::ostream& out) {
  out << "day,new_infections,cumulative\n";
  std::uint64_t cumulative = 0;
  for (std::size_t d = 0; d < series.days(); ++d) {
    cumulative += series[d];
    out << d + 1 << ',' << series[d] << ',' << cumulative << '\n';
  }
}

inline void write_daily_series_csv(const DailySeries& series, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write series file: " + path);
  write_daily_series_csv(series, out);
  if (!out) throw DataError("failed writing series file: " + path);
}

inline DailySeries read_daily_series_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open series file: " + path);
  DailySeries series;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::uint64_t cumulative = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view v = detail::trim(line);
    if (v.empty()) continue;
    if (!header_seen) {
      if (v != "day,new_infections,cumulative")
        throw ParseError("expected header 'day,new_infections,cumulative'", line_no);
      header_seen = true;
      continue;
    }
    const auto c1 = v.find(',');
    const auto c2 = v.find(',', c1 == std::string_view::npos ? c1 : c1 + 1);
    if (c1 == std::string_view::npos || c2 == std::string_view::npos)
      throw ParseError("row is not day,new_infections,cumulative", line_no);
    const auto day = detail::parse_count(v.substr(0, c1), line_no);
    if (day != series.days() + 1) throw ParseError("days must be consecutive from 1", line_no);
    const auto count = detail::parse_count(v.substr(c1 + 1, c2 - c1 - 1), line_no);
    cumulative += count;
    if (detail::parse_count(v.substr(c2 + 1), line_no) != cumulative)
      throw ParseError("cumulative column does not match running sum", line_no);
    series.append(count);
  }
  if (!header_seen) throw ParseError("series file is empty: " + path, line_no);
  return series;
}

}  // namespace fogtrace
