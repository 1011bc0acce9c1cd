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

// Test-only oracle: replays a contact-only epidemic over explicit per-day
// event lists using plain scalar arithmetic. Shares nothing with the
// library's evaluation path beyond the event structs.

#pragma once

#include <cstdint>
#include <vector>

#include "fogtrace/simulation.hpp"

namespace fogtrace::testing {

struct BruteForceResult {
  std::vector<std::uint64_t> daily_new_infections;
  std::vector<double> probability;  // per-user total probability
  std::vector<char> infected;
};

// initial_probability / initial_infected describe the population before day
// one. Events are grouped per day in chronological order. No symptoms are
// modelled, so total probability equals contact probability throughout.
inline BruteForceResult brute_force_replay(
    const std::vector<double>& initial_probability,
    const std::vector<char>& initial_infected,
    const std::vector<std::vector<MeetupEvent>>& per_day_events, double theta,
    double tau0_s, double nu0_dbm) {
  BruteForceResult result;
  result.probability = initial_probability;
  result.infected = initial_infected;
  const std::size_t population = initial_probability.size();

  for (const std::vector<MeetupEvent>& events : per_day_events) {
    const std::vector<double> start_probability = result.probability;
    const std::vector<char> start_infected = result.infected;
    std::vector<double> gain(population, 0.0);
    std::vector<char> touched(population, 0);

    for (const MeetupEvent& e : events) {
      const auto transfer = [&](std::uint32_t from, std::uint32_t to) {
        if (!start_infected[from] || start_infected[to]) return;
        const double lambda = e.signal_dbm >= nu0_dbm ? 1.0 : 0.0;
        const double omega =
            e.contact_time_s <= tau0_s ? e.contact_time_s / tau0_s : 1.0;
        gain[to] += lambda * omega * start_probability[from];
        touched[to] = 1;
      };
      transfer(e.user_a, e.user_b);
      transfer(e.user_b, e.user_a);
    }

    std::uint64_t newly_infected = 0;
    for (std::size_t u = 0; u < population; ++u) {
      if (!touched[u] || start_infected[u]) continue;
      double p = start_probability[u] + gain[u];
      if (p > 1.0) p = 1.0;
      result.probability[u] = p;
      if (p >= theta) {
        result.infected[u] = 1;
        ++newly_infected;
      }
    }
    result.daily_new_infections.push_back(newly_infected);
  }
  return result;
}

}  // namespace fogtrace::testing
