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

// Agent-based simulator: a population of users, randomized daily meetups,
// per-day probability evaluation and a daily new-infection series.
//
// Determinism contract: every random stream (seeding, meetups, symptoms,
// alert cancellations) is derived from (rng_seed, stream tag, day), so a
// day's draws are reproducible in isolation and two runs with the same
// config produce identical results. Infections discovered on day d make a
// user contagious from day d+1 (contact reads happen against day-start
// state), and once a user crosses the infection threshold their probability
// is frozen and they are counted exactly once.

#pragma once

#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fogtrace/core.hpp"
#include "fogtrace/errors.hpp"
#include "fogtrace/util.hpp"

namespace fogtrace {

struct UniformRange {
  double min = 0.0;
  double max = 0.0;
};

namespace detail {
inline constexpr std::uint64_t kInitStream = 1;
inline constexpr std::uint64_t kMeetupStream = 2;
inline constexpr std::uint64_t kSymptomStream = 3;
inline constexpr std::uint64_t kAlertStream = 4;
}  // namespace detail

// Default contact-time sampling sits at or above the threshold, so a meetup
// that passes the signal gate transfers the peer's full probability. Ranges
// dipping below tau0 exercise the ratio branch and are fully supported; the
// default keeps per-day infection counts strong enough that short runs show
// clear daily growth instead of drowning in sampling noise.
inline UniformRange default_contact_time_range(const Thresholds& thresholds) {
  return {thresholds.tau0_s(), 2.0 * thresholds.tau0_s()};
}

// Default signal sampling brackets the bundled -0.55/-0.50 dBm thresholds.
inline UniformRange default_signal_range() { return {-0.75, 0.0}; }

struct SimulationConfig {
  std::uint32_t population = 10000;
  std::uint32_t days = 15;
  Thresholds thresholds{Probability(0.9), 120.0, -0.55};
  std::uint32_t meetups_per_day = 1225;
  std::uint32_t initial_infected = 10;
  double daily_symptom_rate = 0.0;  // per-user chance per day of reporting symptoms
  UniformRange contact_time_range_s{120.0, 240.0};
  UniformRange signal_range_dbm{-0.75, 0.0};
  std::uint64_t rng_seed = 1;
  double alert_compliance = 0.0;  // chance an alerted meetup is called off

  void validate() const {
    if (population == 0) throw ConfigError("population must be positive");
    if (meetups_per_day == 0) throw ConfigError("meetups_per_day must be positive");
    if (initial_infected >= population)
      throw ConfigError("initial_infected must be smaller than the population");
    if (!(daily_symptom_rate >= 0.0 && daily_symptom_rate <= 1.0))
      throw ConfigError("daily_symptom_rate must be in [0, 1]");
    if (!(alert_compliance >= 0.0 && alert_compliance <= 1.0))
      throw ConfigError("alert_compliance must be in [0, 1]");
    if (!std::isfinite(contact_time_range_s.min) || !std::isfinite(contact_time_range_s.max) ||
        contact_time_range_s.min < 0.0 || contact_time_range_s.min > contact_time_range_s.max)
      throw ConfigError("contact_time_range_s must satisfy 0 <= min <= max");
    if (!std::isfinite(signal_range_dbm.min) || !std::isfinite(signal_range_dbm.max) ||
        signal_range_dbm.min > signal_range_dbm.max)
      throw ConfigError("signal_range_dbm must satisfy min <= max");
  }
};

// One sampled proximity event between two distinct users.
struct MeetupEvent {
  std::uint32_t day = 0;
  std::uint32_t user_a = 0;
  std::uint32_t user_b = 0;
  double contact_time_s = 0.0;
  double signal_dbm = 0.0;
};

struct PopulationState {
  std::vector<UserState> states;
  std::uint32_t day = 0;  // completed days

  std::size_t population() const noexcept { return states.size(); }
  bool is_infected(std::uint32_t user) const { return states.at(user).infected; }
  std::size_t infected_count() const {
    std::size_t n = 0;
    for (const UserState& s : states) n += s.infected ? 1 : 0;
    return n;
  }
  std::vector<std::uint32_t> infected_indices() const {
    std::vector<std::uint32_t> out;
    for (std::uint32_t u = 0; u < states.size(); ++u)
      if (states[u].infected) out.push_back(u);
    return out;
  }
};

// Per-day counts of users newly crossing the infection threshold.
class DailySeries {
 public:
  DailySeries() = default;
  explicit DailySeries(std::vector<std::uint64_t> counts) : counts_(std::move(counts)) {}

  void append(std::uint64_t newly_infected) { counts_.push_back(newly_infected); }
  std::size_t days() const noexcept { return counts_.size(); }
  bool empty() const noexcept { return counts_.empty(); }
  std::uint64_t operator[](std::size_t day_index) const { return counts_.at(day_index); }
  const std::vector<std::uint64_t>& new_infections() const noexcept { return counts_; }

  std::vector<std::uint64_t> cumulative() const {
    std::vector<std::uint64_t> out(counts_.size());
    std::partial_sum(counts_.begin(), counts_.end(), out.begin());
    return out;
  }
  std::uint64_t total() const {
    return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
  }

  friend bool operator==(const DailySeries&, const DailySeries&) = default;

 private:
  std::vector<std::uint64_t> counts_;
};

// Seeds initial_infected distinct users (chosen by the seeded RNG) with
// probability 1; everyone else starts zeroed.
inline PopulationState init_population(const SimulationConfig& config) {
  config.validate();
  PopulationState state;
  state.states.resize(config.population);
  if (config.initial_infected > 0) {
    std::vector<std::uint32_t> index(config.population);
    std::iota(index.begin(), index.end(), 0);
    std::mt19937_64 rng(detail::stream_seed(config.rng_seed, detail::kInitStream));
    for (std::uint32_t i = 0; i < config.initial_infected; ++i) {
      std::uniform_int_distribution<std::uint32_t> pick(i, config.population - 1);
      std::swap(index[i], index[pick(rng)]);
      UserState& seed_user = state.states[index[i]];
      seed_user.contact_probability = Probability(1.0);
      seed_user.total_probability = Probability(1.0);
      seed_user.infected = true;
    }
  }
  return state;
}

// Draws exactly meetups_per_day events for the given day: two distinct
// uniformly chosen users plus contact time and signal strength from the
// configured ranges. Depends only on (rng_seed, day), not on prior days.
inline std::vector<MeetupEvent> sample_meetups(const PopulationState& state,
                                               const SimulationConfig& config,
                                               std::uint32_t day) {
  const auto n = static_cast<std::uint32_t>(state.population());
  if (n < 2) throw ConfigError("meetup sampling needs a population of at least 2");
  std::mt19937_64 rng(detail::stream_seed(config.rng_seed, detail::kMeetupStream, day));
  std::uniform_int_distribution<std::uint32_t> pick_first(0, n - 1);
  std::uniform_int_distribution<std::uint32_t> pick_second(0, n - 2);
  std::uniform_real_distribution<double> contact_time(config.contact_time_range_s.min,
                                                      config.contact_time_range_s.max);
  std::uniform_real_distribution<double> signal(config.signal_range_dbm.min,
                                                config.signal_range_dbm.max);
  std::vector<MeetupEvent> events;
  events.reserve(config.meetups_per_day);
  for (std::uint32_t k = 0; k < config.meetups_per_day; ++k) {
    const std::uint32_t a = pick_first(rng);
    std::uint32_t b = pick_second(rng);
    if (b >= a) ++b;  // skip a, keeping b uniform over the others
    events.push_back({day, a, b, contact_time(rng), signal(rng)});
  }
  return events;
}

// Advances the population by one day over the given events and returns the
// number of users who first crossed the infection threshold.
//
// Phases: (0) draw daily symptom flags, (1) gather contact records against
// day-start infected flags and probabilities, (2) evaluate touched users.
// All phase-1 reads complete before any phase-2 write, so infections found
// today only become contagious tomorrow.
inline std::uint64_t step_day(PopulationState& state, std::span<const MeetupEvent> events,
                              const SimulationConfig& config) {
  const std::uint32_t day = state.day + 1;
  const auto n = static_cast<std::uint32_t>(state.population());
  // Everything is validated before any state mutation.
  for (const MeetupEvent& e : events) {
    if (e.user_a >= n || e.user_b >= n)
      throw DataError("meetup event references unknown user index");
    if (e.user_a == e.user_b) throw DataError("meetup event pairs a user with itself");
    if (e.day != day)
      throw DataError("meetup event day " + std::to_string(e.day) +
                      " does not match simulation day " + std::to_string(day));
    ContactRecord{Probability{}, e.contact_time_s, e.signal_dbm}.validate();
  }

  std::vector<std::uint32_t> newly_symptomatic;
  if (config.daily_symptom_rate > 0.0) {
    std::mt19937_64 rng(detail::stream_seed(config.rng_seed, detail::kSymptomStream, day));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::uint32_t u = 0; u < n; ++u) {
      const double draw = unit(rng);  // one draw per user keeps replays aligned
      UserState& s = state.states[u];
      if (draw < config.daily_symptom_rate && !s.infected && !s.symptom.present) {
        s.symptom.present = true;
        newly_symptomatic.push_back(u);
      }
    }
  }

  std::unordered_map<std::uint32_t, std::vector<ContactRecord>> records;
  for (const MeetupEvent& e : events) {
    const UserState& a = state.states[e.user_a];
    const UserState& b = state.states[e.user_b];
    if (a.infected && !b.infected)
      records[e.user_b].push_back(
          {a.total_probability, e.contact_time_s, e.signal_dbm});
    if (b.infected && !a.infected)
      records[e.user_a].push_back(
          {b.total_probability, e.contact_time_s, e.signal_dbm});
  }

  std::uint64_t newly_infected = 0;
  auto evaluate = [&](std::uint32_t u, std::span<const ContactRecord> recs) {
    UserState& s = state.states[u];
    if (s.infected) return;  // frozen once infected
    s = evaluate_user(s, recs, config.thresholds);
    if (s.infected) ++newly_infected;
  };
  for (const auto& [user, recs] : records) evaluate(user, recs);
  for (std::uint32_t u : newly_symptomatic)
    if (!records.contains(u)) evaluate(u, {});

  state.day = day;
  return newly_infected;
}

struct RunResult {
  DailySeries series;
  PopulationState final_state;
};

inline RunResult run_detailed(const SimulationConfig& config) {
  PopulationState state = init_population(config);
  DailySeries series;
  for (std::uint32_t d = 1; d <= config.days; ++d) {
    const std::vector<MeetupEvent> events = sample_meetups(state, config, d);
    series.append(step_day(state, events, config));
  }
  return {std::move(series), std::move(state)};
}

inline DailySeries run(const SimulationConfig& config) { return run_detailed(config).series; }

struct AlertRunResult {
  RunResult baseline;
  RunResult alerted;
};

// Replays the baseline's event stream, cancelling each meetup that involves
// a currently infected user with probability alert_compliance (the alerted
// party stays away; the meetup is not replaced).
inline AlertRunResult run_with_alerts_detailed(const SimulationConfig& config) {
  RunResult baseline = run_detailed(config);

  PopulationState state = init_population(config);
  DailySeries series;
  std::vector<MeetupEvent> kept;
  for (std::uint32_t d = 1; d <= config.days; ++d) {
    const std::vector<MeetupEvent> events = sample_meetups(state, config, d);
    std::mt19937_64 alert_rng(detail::stream_seed(config.rng_seed, detail::kAlertStream, d));
    std::bernoulli_distribution cancel(config.alert_compliance);
    kept.clear();
    kept.reserve(events.size());
    for (const MeetupEvent& e : events) {
      const bool alerted =
          state.states[e.user_a].infected || state.states[e.user_b].infected;
      if (alerted && config.alert_compliance > 0.0 && cancel(alert_rng)) continue;
      kept.push_back(e);
    }
    series.append(step_day(state, kept, config));
  }
  return {std::move(baseline), {std::move(series), std::move(state)}};
}

inline std::pair<DailySeries, DailySeries> run_with_alerts(const SimulationConfig& config) {
  AlertRunResult result = run_with_alerts_detailed(config);
  return {std::move(result.baseline.series), std::move(result.alerted.series)};
}

// Continues the simulation from an existing state under an assumed meetup
// rate. With the current rate this is exactly the uninterrupted run, since
// each day's draws depend only on (rng_seed, day).
inline DailySeries predict_future(const PopulationState& from,
                                  std::uint32_t assumed_meetups_per_day,
                                  std::uint32_t horizon_days,
                                  const SimulationConfig& config) {
  SimulationConfig assumed = config;
  assumed.meetups_per_day = assumed_meetups_per_day;
  assumed.population = static_cast<std::uint32_t>(from.population());
  assumed.initial_infected = 0;
  assumed.validate();
  PopulationState state = from;
  DailySeries series;
  for (std::uint32_t i = 0; i < horizon_days; ++i) {
    const std::vector<MeetupEvent> events = sample_meetups(state, assumed, state.day + 1);
    series.append(step_day(state, events, assumed));
  }
  return series;
}

}  // namespace fogtrace
