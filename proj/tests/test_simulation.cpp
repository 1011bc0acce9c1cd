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

#include "fogtrace/simulation.hpp"

#include <algorithm>
#include <set>

#include "brute_force.hpp"
#include "doctest.h"

using namespace fogtrace;

namespace {

SimulationConfig small_config() {
  SimulationConfig config;
  config.population = 10;
  config.days = 3;
  config.thresholds = Thresholds(Probability(0.9), 120.0, -0.55);
  config.meetups_per_day = 6;
  config.initial_infected = 2;
  config.rng_seed = 99;
  return config;
}

std::vector<std::uint32_t> seeded_users(const PopulationState& state) {
  return state.infected_indices();
}

}  // namespace

TEST_SUITE_BEGIN("simulation");

TEST_CASE("config validation rejects out-of-domain settings") {
  SimulationConfig config = small_config();
  config.meetups_per_day = 0;
  CHECK_THROWS_AS(config.validate(), ConfigError);

  config = small_config();
  config.initial_infected = config.population;
  CHECK_THROWS_AS(config.validate(), ConfigError);

  config = small_config();
  config.daily_symptom_rate = 1.5;
  CHECK_THROWS_AS(config.validate(), ConfigError);

  config = small_config();
  config.contact_time_range_s = {-1.0, 10.0};
  CHECK_THROWS_AS(config.validate(), ConfigError);

  config = small_config();
  config.signal_range_dbm = {0.0, -1.0};
  CHECK_THROWS_AS(config.validate(), ConfigError);

  config = small_config();
  config.alert_compliance = -0.1;
  CHECK_THROWS_AS(config.validate(), ConfigError);
}

TEST_CASE("init_population seeds the requested number of users") {
  SimulationConfig config = small_config();
  config.initial_infected = 0;
  PopulationState state = init_population(config);
  CHECK(state.population() == 10);
  CHECK(state.infected_count() == 0);
  for (const UserState& s : state.states) CHECK(s.total_probability.value() == 0.0);

  config = small_config();
  config.population = 10000;
  config.initial_infected = 10;
  config.rng_seed = 42;
  state = init_population(config);
  CHECK(state.infected_count() == 10);
  for (std::uint32_t u : seeded_users(state)) {
    CHECK(state.states[u].total_probability.value() == 1.0);
    CHECK(state.states[u].infected);
  }
  // deterministic per seed
  CHECK(seeded_users(init_population(config)) == seeded_users(state));

  config.rng_seed = 43;
  CHECK(seeded_users(init_population(config)) != seeded_users(state));
}

TEST_CASE("sample_meetups draws the exact count with distinct users") {
  SimulationConfig config = small_config();
  config.population = 10000;
  config.meetups_per_day = 1225;
  const PopulationState state = init_population(config);
  const auto events = sample_meetups(state, config, 1);
  CHECK(events.size() == 1225);
  for (const MeetupEvent& e : events) {
    CHECK(e.user_a != e.user_b);
    CHECK(e.user_a < 10000);
    CHECK(e.user_b < 10000);
    CHECK(e.day == 1);
    CHECK(e.contact_time_s >= config.contact_time_range_s.min);
    CHECK(e.contact_time_s <= config.contact_time_range_s.max);
    CHECK(e.signal_dbm >= config.signal_range_dbm.min);
    CHECK(e.signal_dbm <= config.signal_range_dbm.max);
  }
}

TEST_CASE("sample_meetups depends only on seed and day") {
  SimulationConfig config = small_config();
  const PopulationState fresh = init_population(config);

  // advance a copy by one day; day-2 draws must match regardless of history
  PopulationState advanced = fresh;
  (void)step_day(advanced, sample_meetups(advanced, config, 1), config);

  const auto from_fresh = sample_meetups(fresh, config, 2);
  const auto from_advanced = sample_meetups(advanced, config, 2);
  REQUIRE(from_fresh.size() == from_advanced.size());
  for (std::size_t i = 0; i < from_fresh.size(); ++i) {
    CHECK(from_fresh[i].user_a == from_advanced[i].user_a);
    CHECK(from_fresh[i].user_b == from_advanced[i].user_b);
    CHECK(from_fresh[i].contact_time_s == from_advanced[i].contact_time_s);
    CHECK(from_fresh[i].signal_dbm == from_advanced[i].signal_dbm);
  }

  const auto different_day = sample_meetups(fresh, config, 3);
  CHECK((different_day[0].user_a != from_fresh[0].user_a ||
         different_day[0].user_b != from_fresh[0].user_b ||
         different_day[0].contact_time_s != from_fresh[0].contact_time_s));
}

TEST_CASE("sample_meetups requires at least two users") {
  SimulationConfig config = small_config();
  config.population = 1;
  config.initial_infected = 0;
  const PopulationState state = init_population(config);
  CHECK_THROWS_AS(sample_meetups(state, config, 1), ConfigError);
}

TEST_CASE("step_day with no infection sources yields zero") {
  SimulationConfig config = small_config();
  config.initial_infected = 0;
  PopulationState state = init_population(config);
  const auto events = sample_meetups(state, config, 1);
  CHECK(step_day(state, events, config) == 0);
  CHECK(state.day == 1);
  CHECK(state.infected_count() == 0);
}

TEST_CASE("a full-strength meetup with an infected user transfers everything") {
  SimulationConfig config = small_config();
  config.population = 2;
  config.initial_infected = 1;
  PopulationState state = init_population(config);
  const std::uint32_t infected = seeded_users(state)[0];
  const std::uint32_t other = infected == 0 ? 1 : 0;

  const std::vector<MeetupEvent> events = {
      {1, infected, other, /*contact_time_s=*/240.0, /*signal_dbm=*/-0.55}};
  CHECK(step_day(state, events, config) == 1);
  CHECK(state.states[other].contact_probability.value() == 1.0);
  CHECK(state.states[other].infected);
}

TEST_CASE("meetups below the signal threshold transfer nothing") {
  SimulationConfig config = small_config();
  config.population = 2;
  config.initial_infected = 1;
  PopulationState state = init_population(config);
  const std::uint32_t infected = seeded_users(state)[0];
  const std::uint32_t other = infected == 0 ? 1 : 0;

  const std::vector<MeetupEvent> events = {{1, infected, other, 600.0, -0.7}};
  CHECK(step_day(state, events, config) == 0);
  CHECK(state.states[other].contact_probability.value() == 0.0);
}

TEST_CASE("symptomatic users with no meetups are counted for the day") {
  SimulationConfig config = small_config();
  config.population = 4;
  config.initial_infected = 0;
  config.daily_symptom_rate = 1.0;  // everyone reports symptoms on day one
  PopulationState state = init_population(config);
  CHECK(step_day(state, {}, config) == 4);
  for (const UserState& s : state.states) {
    CHECK(s.total_probability.value() == 0.9);
    CHECK(s.infected);
  }
}

TEST_CASE("step_day rejects malformed events") {
  SimulationConfig config = small_config();
  PopulationState state = init_population(config);

  std::vector<MeetupEvent> events = {{1, 0, 99, 60.0, -0.4}};
  CHECK_THROWS_AS(step_day(state, events, config), DataError);

  events = {{1, 3, 3, 60.0, -0.4}};
  CHECK_THROWS_AS(step_day(state, events, config), DataError);

  events = {{7, 0, 1, 60.0, -0.4}};  // wrong day
  CHECK_THROWS_AS(step_day(state, events, config), DataError);
}

TEST_CASE("run with zero days returns an empty series") {
  SimulationConfig config = small_config();
  config.days = 0;
  CHECK(run(config).empty());
}

TEST_CASE("run without any infection source stays at zero") {
  SimulationConfig config = small_config();
  config.initial_infected = 0;
  config.daily_symptom_rate = 0.0;
  config.days = 5;
  const DailySeries series = run(config);
  REQUIRE(series.days() == 5);
  for (std::size_t d = 0; d < series.days(); ++d) CHECK(series[d] == 0);
}

TEST_CASE("run is deterministic and matches a manual day loop") {
  SimulationConfig config = small_config();
  config.population = 500;
  config.meetups_per_day = 100;
  config.days = 6;
  config.daily_symptom_rate = 0.01;

  const DailySeries first = run(config);
  const DailySeries second = run(config);
  CHECK(first == second);

  PopulationState state = init_population(config);
  DailySeries manual;
  for (std::uint32_t d = 1; d <= config.days; ++d)
    manual.append(step_day(state, sample_meetups(state, config, d), config));
  CHECK(manual == first);
}

TEST_CASE("conservation: total infections never exceed the population") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SimulationConfig config = small_config();
    config.population = 300;
    config.meetups_per_day = 150;
    config.days = 12;
    config.initial_infected = 5;
    config.daily_symptom_rate = 0.02;
    config.rng_seed = seed;
    const DailySeries series = run(config);
    CHECK(series.total() + config.initial_infected <= config.population);
    const auto cumulative = series.cumulative();
    for (std::size_t d = 1; d < cumulative.size(); ++d)
      CHECK(cumulative[d] >= cumulative[d - 1]);
  }
}

TEST_CASE("once infected, a user never leaves the infected set") {
  SimulationConfig config = small_config();
  config.population = 200;
  config.meetups_per_day = 120;
  config.days = 10;
  config.initial_infected = 4;
  config.daily_symptom_rate = 0.01;

  PopulationState state = init_population(config);
  std::set<std::uint32_t> infected_so_far;
  for (std::uint32_t u : state.infected_indices()) infected_so_far.insert(u);
  for (std::uint32_t d = 1; d <= config.days; ++d) {
    (void)step_day(state, sample_meetups(state, config, d), config);
    for (std::uint32_t u : infected_so_far) CHECK(state.states[u].infected);
    for (std::uint32_t u : state.infected_indices()) infected_so_far.insert(u);
  }
}

TEST_CASE("brute-force replay over the explicit event list matches exactly") {
  SimulationConfig config = small_config();  // N=10, 3 days, fixed seed
  PopulationState state = init_population(config);

  std::vector<double> initial_p(config.population);
  std::vector<char> initial_infected(config.population);
  for (std::uint32_t u = 0; u < config.population; ++u) {
    initial_p[u] = state.states[u].total_probability.value();
    initial_infected[u] = state.states[u].infected ? 1 : 0;
  }

  std::vector<std::vector<MeetupEvent>> per_day;
  DailySeries series;
  for (std::uint32_t d = 1; d <= config.days; ++d) {
    per_day.push_back(sample_meetups(state, config, d));
    series.append(step_day(state, per_day.back(), config));
  }

  const auto oracle = fogtrace::testing::brute_force_replay(
      initial_p, initial_infected, per_day, config.thresholds.theta().value(),
      config.thresholds.tau0_s(), config.thresholds.nu0_dbm());

  REQUIRE(oracle.daily_new_infections.size() == series.days());
  for (std::size_t d = 0; d < series.days(); ++d)
    CHECK(oracle.daily_new_infections[d] == series[d]);
  for (std::uint32_t u = 0; u < config.population; ++u) {
    CHECK(oracle.probability[u] == state.states[u].total_probability.value());
    CHECK((oracle.infected[u] == 1) == state.states[u].infected);
  }
}

TEST_CASE("alerts: zero compliance reproduces the baseline exactly") {
  SimulationConfig config = small_config();
  config.population = 300;
  config.meetups_per_day = 150;
  config.days = 8;
  config.alert_compliance = 0.0;
  const auto [baseline, alerted] = run_with_alerts(config);
  CHECK(baseline == alerted);
}

TEST_CASE("alerts: full compliance dominates the baseline every day") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SimulationConfig config = small_config();
    config.population = 400;
    config.meetups_per_day = 200;
    config.days = 10;
    config.initial_infected = 5;
    config.daily_symptom_rate = 0.01;
    config.alert_compliance = 1.0;
    config.rng_seed = seed;
    const auto [baseline, alerted] = run_with_alerts(config);
    const auto base_cumulative = baseline.cumulative();
    const auto alert_cumulative = alerted.cumulative();
    REQUIRE(base_cumulative.size() == alert_cumulative.size());
    for (std::size_t d = 0; d < base_cumulative.size(); ++d)
      CHECK(alert_cumulative[d] <= base_cumulative[d]);
  }
}

TEST_CASE("alerts: full compliance fully cuts the chain from a single seed") {
  SimulationConfig config = small_config();
  config.population = 10;
  config.meetups_per_day = 20;
  config.days = 6;
  config.initial_infected = 1;
  config.daily_symptom_rate = 0.0;
  config.alert_compliance = 1.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    config.rng_seed = seed;
    const auto [baseline, alerted] = run_with_alerts(config);
    CHECK(alerted.total() == 0);  // contact chain severed; no symptom source
    CHECK(baseline.total() >= alerted.total());
  }
}

TEST_CASE("predict_future with zero horizon is empty") {
  SimulationConfig config = small_config();
  const RunResult result = run_detailed(config);
  CHECK(predict_future(result.final_state, 5, 0, config).empty());
}

TEST_CASE("predict_future at the current rate equals the uninterrupted run") {
  SimulationConfig config = small_config();
  config.population = 300;
  config.meetups_per_day = 120;
  config.days = 12;
  config.initial_infected = 4;

  SimulationConfig head_config = config;
  head_config.days = 7;
  const RunResult head = run_detailed(head_config);
  const DailySeries tail = predict_future(head.final_state, config.meetups_per_day, 5, config);

  const DailySeries full = run(config);
  REQUIRE(tail.days() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(tail[i] == full[7 + i]);
}

TEST_CASE("predict_future with everyone infected stays at zero") {
  SimulationConfig config = small_config();
  PopulationState everyone;
  everyone.states.resize(8);
  for (UserState& s : everyone.states) {
    s.contact_probability = Probability(1.0);
    s.total_probability = Probability(1.0);
    s.infected = true;
  }
  const DailySeries future = predict_future(everyone, 10, 6, config);
  CHECK(future.total() == 0);
}

TEST_CASE("predict_future: fewer meetups never produce more infections") {
  // Fixed seeds; the reduced-rate event list is a prefix of the full-rate
  // list, so with full-strength transfers the epidemic can only shrink.
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    SimulationConfig config = small_config();
    config.population = 400;
    config.meetups_per_day = 200;
    config.days = 4;
    config.initial_infected = 6;
    config.rng_seed = seed;
    const RunResult head = run_detailed(config);
    const DailySeries slowed = predict_future(head.final_state, 80, 8, config);
    const DailySeries current = predict_future(head.final_state, 200, 8, config);
    const auto slowed_cumulative = slowed.cumulative();
    const auto current_cumulative = current.cumulative();
    for (std::size_t d = 0; d < slowed_cumulative.size(); ++d)
      CHECK(slowed_cumulative[d] <= current_cumulative[d]);
  }
}

TEST_SUITE_END();
