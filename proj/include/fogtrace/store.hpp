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

// In-memory fog-server state: registration, meetup/symptom ingestion, batch
// compute cycles, per-user reports, cloud sync and snapshot persistence.
//
// Every mutation runs under one mutex, so register/ingest/cycle/report are
// linearizable and a reader sees either the full pre-cycle or the full
// post-cycle state. Meetup contributions read peer probabilities as of cycle
// start, matching the simulator's day semantics, and a user who crosses the
// infection threshold is frozen and never leaves the infected set.

#pragma once

#include <cstdint>
#include <ctime>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fogtrace/core.hpp"
#include "fogtrace/errors.hpp"
#include "fogtrace/risk.hpp"
#include "fogtrace/simulation.hpp"
#include "fogtrace/sinks.hpp"
#include "fogtrace/util.hpp"
#include "json.hpp"

namespace fogtrace {

struct UserProfile {
  std::string user_id;
  std::string contact_number;
  std::string location;
  std::uint32_t age = 0;

  friend bool operator==(const UserProfile&, const UserProfile&) = default;
};

struct MeetupIngest {
  std::string user_a;
  std::string user_b;
  double contact_time_s = 0.0;
  double signal_dbm = 0.0;
};

struct MeetupAck {
  bool ok = false;
  bool alert = false;  // set when the other party is currently infected
};

struct CycleSummary {
  std::uint64_t cycle = 0;
  std::size_t users_updated = 0;
  std::uint64_t newly_infected = 0;
  std::size_t meetups_processed = 0;
  std::size_t symptoms_processed = 0;
};

class FogStore {
 public:
  using Clock = std::function<std::int64_t()>;

  FogStore(Thresholds thresholds, RiskBands bands, GuidanceTable guidance,
           Clock clock = system_clock())
      : thresholds_(std::move(thresholds)),
        bands_(std::move(bands)),
        guidance_(std::move(guidance)),
        clock_(std::move(clock)) {}

  static Clock system_clock() {
    return [] { return static_cast<std::int64_t>(std::time(nullptr)); };
  }

  // Registers a user; idempotent for an identical resubmission, conflict for
  // a different profile under the same id. Empty user_id gets a generated one.
  std::string register_user(UserProfile profile) {
    std::lock_guard lock(mu_);
    if (profile.user_id.empty()) {
      do {
        char generated[16];
        std::snprintf(generated, sizeof generated, "u-%06llu",
                      static_cast<unsigned long long>(++id_counter_));
        profile.user_id = generated;
      } while (users_.contains(profile.user_id));
    }
    auto it = users_.find(profile.user_id);
    if (it != users_.end()) {
      if (it->second.profile == profile) return profile.user_id;  // idempotent
      throw ConflictError("user '" + profile.user_id +
                          "' already registered with a different profile");
    }
    std::string id = profile.user_id;
    users_.emplace(id, UserEntry{std::move(profile), UserState{}, std::nullopt});
    return id;
  }

  // Queues a meetup for the next cycle. The ack carries an alert when either
  // party is currently infected.
  MeetupAck ingest_meetup(const MeetupIngest& meetup) {
    if (meetup.user_a == meetup.user_b)
      throw std::domain_error("meetup must involve two distinct users");
    ContactRecord{Probability{}, meetup.contact_time_s, meetup.signal_dbm}.validate();
    std::lock_guard lock(mu_);
    const UserEntry& a = entry(meetup.user_a);
    const UserEntry& b = entry(meetup.user_b);
    pending_meetups_.push_back({meetup, clock_()});
    return {true, a.state.infected || b.state.infected};
  }

  void ingest_symptom(const std::string& user_id, int flag) {
    const SymptomFlag symptom = symptom_flag_from_int(flag);
    std::lock_guard lock(mu_);
    entry(user_id);
    pending_symptoms_.push_back({user_id, symptom, clock_()});
  }

  // Drains pending events and re-evaluates affected users. Contact records
  // take the peer's probability as of cycle start; users already infected
  // stay frozen. A report is appended for every registered user.
  CycleSummary compute_cycle() {
    std::lock_guard lock(mu_);
    CycleSummary summary;
    summary.cycle = ++cycle_;
    summary.meetups_processed = pending_meetups_.size();
    summary.symptoms_processed = pending_symptoms_.size();

    std::vector<std::string> newly_symptomatic;
    for (const PendingSymptom& pending : pending_symptoms_) {
      UserEntry& user = users_.at(pending.user_id);
      const bool turned_on = pending.symptom.present && !user.state.symptom.present;
      user.state.symptom = pending.symptom;
      if (turned_on && !user.state.infected) newly_symptomatic.push_back(pending.user_id);
    }

    // Reads of peer state complete before any evaluation writes.
    std::map<std::string, std::vector<ContactRecord>> records;
    for (const PendingMeetup& pending : pending_meetups_) {
      const MeetupIngest& m = pending.meetup;
      const UserEntry& a = users_.at(m.user_a);
      const UserEntry& b = users_.at(m.user_b);
      if (a.state.infected && !b.state.infected)
        records[m.user_b].push_back(
            {a.state.total_probability, m.contact_time_s, m.signal_dbm});
      if (b.state.infected && !a.state.infected)
        records[m.user_a].push_back(
            {b.state.total_probability, m.contact_time_s, m.signal_dbm});
    }

    auto evaluate = [&](const std::string& user_id, std::span<const ContactRecord> recs) {
      UserEntry& user = users_.at(user_id);
      if (user.state.infected) return;  // frozen
      user.state = evaluate_user(user.state, recs, thresholds_);
      ++summary.users_updated;
      if (user.state.infected) ++summary.newly_infected;
    };
    for (const auto& [user_id, recs] : records) evaluate(user_id, recs);
    for (const std::string& user_id : newly_symptomatic)
      if (!records.contains(user_id)) evaluate(user_id, {});

    pending_meetups_.clear();
    pending_symptoms_.clear();
    infection_series_.append(summary.newly_infected);

    const std::int64_t now = clock_();
    for (auto& [user_id, user] : users_) {
      const RiskLevel level = infection_level(user.state.total_probability, bands_);
      report_log_.push_back(build_report(user.state, level, guidance_, user_id, now));
      user.latest_report = report_log_.size() - 1;
    }
    return summary;
  }

  // Latest report for the user, or a provisional zeroed report if no cycle
  // has run since registration.
  Report report_for(const std::string& user_id) const {
    std::lock_guard lock(mu_);
    const UserEntry& user = entry(user_id);
    if (user.latest_report) return report_log_[*user.latest_report];
    const RiskLevel level = infection_level(user.state.total_probability, bands_);
    return build_report(user.state, level, guidance_, user_id, clock_());
  }

  UserState state_of(const std::string& user_id) const {
    std::lock_guard lock(mu_);
    return entry(user_id).state;
  }

  // Per-cycle newly infected counts.
  DailySeries infection_series() const {
    std::lock_guard lock(mu_);
    return infection_series_;
  }

  std::size_t user_count() const {
    std::lock_guard lock(mu_);
    return users_.size();
  }

  std::uint64_t cycle_count() const {
    std::lock_guard lock(mu_);
    return cycle_;
  }

  std::size_t pending_report_count() const {
    std::lock_guard lock(mu_);
    return report_log_.size() - sync_cursor_;
  }

  // Delivers every report since the last acknowledged sync. The cursor only
  // advances when the whole batch succeeded, so a failed sync re-delivers
  // (at-least-once; the sink must tolerate duplicates).
  std::size_t sync(ReportSink& sink) {
    std::lock_guard sync_lock(sync_mu_);
    std::size_t from = 0;
    std::vector<Report> batch;
    {
      std::lock_guard lock(mu_);
      from = sync_cursor_;
      batch.assign(report_log_.begin() + static_cast<std::ptrdiff_t>(from),
                   report_log_.end());
    }
    for (const Report& report : batch) sink.deliver(report);  // SinkError propagates
    {
      std::lock_guard lock(mu_);
      sync_cursor_ = std::max(sync_cursor_, from + batch.size());
    }
    return batch.size();
  }

  void save_snapshot(const std::string& path) const {
    std::string payload;
    {
      std::lock_guard lock(mu_);
      payload = to_snapshot_json().dump();
    }
    std::ostringstream header;
    header << "fogtrace-snapshot v1 crc32=" << std::hex << detail::crc32(payload)
           << std::dec << " bytes=" << payload.size() << '\n';
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write snapshot file: " + path);
    out << header.str() << payload;
    out.flush();
    if (!out) throw DataError("failed writing snapshot file: " + path);
  }

  // Replaces the entire store contents (including thresholds, bands and
  // guidance) with the snapshot's. A corrupt or truncated file loads nothing.
  void restore_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open snapshot file: " + path);
    std::string header_line;
    if (!std::getline(in, header_line)) throw IntegrityError("snapshot is empty: " + path);
    unsigned long crc_expected = 0;
    unsigned long long bytes_expected = 0;
    if (std::sscanf(header_line.c_str(), "fogtrace-snapshot v1 crc32=%lx bytes=%llu",
                    &crc_expected, &bytes_expected) != 2)
      throw IntegrityError("snapshot header is malformed: " + path);
    std::string payload((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    if (payload.size() != bytes_expected)
      throw IntegrityError("snapshot is truncated or padded: expected " +
                           std::to_string(bytes_expected) + " bytes, got " +
                           std::to_string(payload.size()));
    if (detail::crc32(payload) != crc_expected)
      throw IntegrityError("snapshot checksum mismatch: " + path);

    nlohmann::json j;
    try {
      j = nlohmann::json::parse(payload);
    } catch (const nlohmann::json::parse_error& e) {
      throw IntegrityError(std::string("snapshot payload is not valid JSON: ") + e.what());
    }
    try {
      from_snapshot_json(j);
    } catch (const nlohmann::json::exception& e) {
      throw IntegrityError(std::string("snapshot payload has unexpected shape: ") + e.what());
    } catch (const std::domain_error& e) {
      throw IntegrityError(std::string("snapshot payload has invalid values: ") + e.what());
    } catch (const ConfigError& e) {
      throw IntegrityError(std::string("snapshot payload has invalid config: ") + e.what());
    }
  }

  Thresholds thresholds() const {
    std::lock_guard lock(mu_);
    return thresholds_;
  }
  RiskBands bands() const {
    std::lock_guard lock(mu_);
    return bands_;
  }

 private:
  struct UserEntry {
    UserProfile profile;
    UserState state;
    std::optional<std::size_t> latest_report;  // index into report_log_
  };

  struct PendingMeetup {
    MeetupIngest meetup;
    std::int64_t received_at = 0;
  };

  struct PendingSymptom {
    std::string user_id;
    SymptomFlag symptom;
    std::int64_t received_at = 0;
  };

  const UserEntry& entry(const std::string& user_id) const {
    auto it = users_.find(user_id);
    if (it == users_.end()) throw NotFoundError("unknown user: " + user_id);
    return it->second;
  }
  UserEntry& entry(const std::string& user_id) {
    auto it = users_.find(user_id);
    if (it == users_.end()) throw NotFoundError("unknown user: " + user_id);
    return it->second;
  }

  static nlohmann::json state_to_json(const UserState& s) {
    return {{"p", s.contact_probability.value()},
            {"alpha", s.symptom_probability.value()},
            {"total", s.total_probability.value()},
            {"symptom", s.symptom.value()},
            {"infected", s.infected},
            {"traced_count", s.traced_count}};
  }

  static UserState state_from_json(const nlohmann::json& j) {
    return UserState{
        .contact_probability = Probability(j.at("p").get<double>()),
        .symptom_probability = Probability(j.at("alpha").get<double>()),
        .total_probability = Probability(j.at("total").get<double>()),
        .symptom = symptom_flag_from_int(j.at("symptom").get<int>()),
        .infected = j.at("infected").get<bool>(),
        .traced_count = j.at("traced_count").get<std::uint32_t>(),
    };
  }

  nlohmann::json to_snapshot_json() const {
    nlohmann::json users = nlohmann::json::array();
    for (const auto& [user_id, user] : users_) {
      nlohmann::json u{
          {"user_id", user_id},
          {"contact_number", user.profile.contact_number},
          {"location", user.profile.location},
          {"age", user.profile.age},
          {"state", state_to_json(user.state)},
      };
      if (user.latest_report) u["latest_report"] = *user.latest_report;
      users.push_back(std::move(u));
    }
    nlohmann::json meetups = nlohmann::json::array();
    for (const PendingMeetup& pending : pending_meetups_)
      meetups.push_back({{"user_a", pending.meetup.user_a},
                         {"user_b", pending.meetup.user_b},
                         {"contact_time_s", pending.meetup.contact_time_s},
                         {"signal_dbm", pending.meetup.signal_dbm},
                         {"received_at", pending.received_at}});
    nlohmann::json symptoms = nlohmann::json::array();
    for (const PendingSymptom& pending : pending_symptoms_)
      symptoms.push_back({{"user_id", pending.user_id},
                          {"flag", pending.symptom.value()},
                          {"received_at", pending.received_at}});
    nlohmann::json reports = nlohmann::json::array();
    for (const Report& r : report_log_) reports.push_back(report_to_json(r));

    return nlohmann::json{
        {"thresholds",
         {{"theta", thresholds_.theta().value()},
          {"tau0_s", thresholds_.tau0_s()},
          {"nu0_dbm", thresholds_.nu0_dbm()}}},
        {"bands",
         {{"p_low", bands_.p_low().value()},
          {"p_avg", bands_.p_avg().value()},
          {"p_high", bands_.p_high().value()}}},
        {"guidance",
         {{"low", guidance_.text_for(RiskLevel::kLow)},
          {"moderate", guidance_.text_for(RiskLevel::kModerate)},
          {"high", guidance_.text_for(RiskLevel::kHigh)},
          {"very_high", guidance_.text_for(RiskLevel::kVeryHigh)}}},
        {"cycle", cycle_},
        {"sync_cursor", sync_cursor_},
        {"id_counter", id_counter_},
        {"users", std::move(users)},
        {"pending_meetups", std::move(meetups)},
        {"pending_symptoms", std::move(symptoms)},
        {"series", infection_series_.new_infections()},
        {"reports", std::move(reports)},
    };
  }

  void from_snapshot_json(const nlohmann::json& j) {
    const auto& jt = j.at("thresholds");
    Thresholds thresholds(Probability(jt.at("theta").get<double>()),
                          jt.at("tau0_s").get<double>(),
                          jt.at("nu0_dbm").get<double>());
    const auto& jb = j.at("bands");
    RiskBands bands(Probability(jb.at("p_low").get<double>()),
                    Probability(jb.at("p_avg").get<double>()),
                    Probability(jb.at("p_high").get<double>()));
    const auto& jg = j.at("guidance");
    GuidanceTable guidance = GuidanceTable::from_map({
        {RiskLevel::kLow, jg.at("low").get<std::string>()},
        {RiskLevel::kModerate, jg.at("moderate").get<std::string>()},
        {RiskLevel::kHigh, jg.at("high").get<std::string>()},
        {RiskLevel::kVeryHigh, jg.at("very_high").get<std::string>()},
    });

    std::map<std::string, UserEntry> users;
    for (const auto& u : j.at("users")) {
      UserEntry user;
      user.profile.user_id = u.at("user_id").get<std::string>();
      user.profile.contact_number = u.at("contact_number").get<std::string>();
      user.profile.location = u.at("location").get<std::string>();
      user.profile.age = u.at("age").get<std::uint32_t>();
      user.state = state_from_json(u.at("state"));
      if (u.contains("latest_report"))
        user.latest_report = u.at("latest_report").get<std::size_t>();
      users.emplace(user.profile.user_id, std::move(user));
    }
    std::vector<PendingMeetup> meetups;
    for (const auto& m : j.at("pending_meetups")) {
      meetups.push_back({MeetupIngest{m.at("user_a").get<std::string>(),
                                      m.at("user_b").get<std::string>(),
                                      m.at("contact_time_s").get<double>(),
                                      m.at("signal_dbm").get<double>()},
                         m.at("received_at").get<std::int64_t>()});
      ContactRecord{Probability{}, meetups.back().meetup.contact_time_s,
                    meetups.back().meetup.signal_dbm}
          .validate();
    }
    std::vector<PendingSymptom> symptoms;
    for (const auto& s : j.at("pending_symptoms"))
      symptoms.push_back({s.at("user_id").get<std::string>(),
                          symptom_flag_from_int(s.at("flag").get<int>()),
                          s.at("received_at").get<std::int64_t>()});
    std::vector<Report> reports;
    for (const auto& r : j.at("reports")) reports.push_back(report_from_json(r));
    DailySeries series(j.at("series").get<std::vector<std::uint64_t>>());

    // All parsed; swap in atomically.
    std::lock_guard lock(mu_);
    thresholds_ = thresholds;
    bands_ = bands;
    guidance_ = std::move(guidance);
    cycle_ = j.at("cycle").get<std::uint64_t>();
    sync_cursor_ = j.at("sync_cursor").get<std::size_t>();
    id_counter_ = j.at("id_counter").get<std::uint64_t>();
    users_ = std::move(users);
    pending_meetups_ = std::move(meetups);
    pending_symptoms_ = std::move(symptoms);
    report_log_ = std::move(reports);
    infection_series_ = std::move(series);
  }

  mutable std::mutex mu_;
  std::mutex sync_mu_;  // serializes concurrent sync calls
  Thresholds thresholds_;
  RiskBands bands_;
  GuidanceTable guidance_;
  Clock clock_;
  std::map<std::string, UserEntry> users_;
  std::vector<PendingMeetup> pending_meetups_;
  std::vector<PendingSymptom> pending_symptoms_;
  std::vector<Report> report_log_;
  DailySeries infection_series_;
  std::uint64_t cycle_ = 0;
  std::size_t sync_cursor_ = 0;
  std::uint64_t id_counter_ = 0;
};

}  // namespace fogtrace
