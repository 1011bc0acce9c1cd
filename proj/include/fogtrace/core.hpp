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

// Infection-probability kernel. A user's chance of being infected is built
// from two sources:
//
//   contact probability p: accumulated from meetups with infected peers.
//     Each meetup transfers a fraction mu = lambda * omega of the peer's own
//     probability C, where lambda gates on Bluetooth signal strength
//     (1 iff nu >= nu0, i.e. the two devices were close enough) and omega is
//     the contact-time fraction tau/tau0, saturating at 1.
//   symptom probability alpha: S * (1 - p) * theta for a user reporting
//     symptoms (S = 1), sized so that a symptomatic user always reaches the
//     infection threshold theta regardless of contact history.
//
// Total probability P = p + alpha is compared against theta to classify a
// user as infected. All operations are pure; callers own state transitions.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

#include "fogtrace/errors.hpp"

namespace fogtrace {

// A unitless value in [0, 1]. Construction rejects out-of-range and NaN;
// clamped() is for the one place the calculus clamps, the contact sum.
class Probability {
 public:
  constexpr Probability() = default;
  explicit Probability(double v) : v_(checked(v)) {}

  static Probability clamped(double v) {
    if (std::isnan(v)) throw std::domain_error("probability must not be NaN");
    return Probability(std::clamp(v, 0.0, 1.0), Unchecked{});
  }

  constexpr double value() const noexcept { return v_; }
  friend constexpr auto operator<=>(Probability, Probability) = default;

 private:
  struct Unchecked {};
  constexpr Probability(double v, Unchecked) noexcept : v_(v) {}
  static double checked(double v) {
    if (!(v >= 0.0 && v <= 1.0))
      throw std::domain_error("probability outside [0, 1]: " + std::to_string(v));
    return v;
  }

  double v_ = 0.0;
};

// Binary symptom status S.
struct SymptomFlag {
  bool present = false;
  constexpr int value() const noexcept { return present ? 1 : 0; }
  friend constexpr bool operator==(SymptomFlag, SymptomFlag) = default;
};

inline SymptomFlag symptom_flag_from_int(int raw) {
  if (raw != 0 && raw != 1)
    throw std::domain_error("symptom flag must be 0 or 1, got " + std::to_string(raw));
  return SymptomFlag{raw == 1};
}

// One traced meetup seen from one user's side: the peer's infection
// probability C, contact time tau and Bluetooth signal strength nu.
struct ContactRecord {
  Probability peer_probability{};
  double contact_time_s = 0.0;
  double signal_dbm = 0.0;

  void validate() const {
    if (!std::isfinite(contact_time_s) || contact_time_s < 0.0)
      throw std::domain_error("contact time must be finite and nonnegative");
    if (!std::isfinite(signal_dbm))
      throw std::domain_error("signal strength must be finite");
  }
};

// The three model thresholds: infection probability theta, contact time tau0
// (seconds) and signal strength nu0 (dBm, larger = stronger).
class Thresholds {
 public:
  Thresholds(Probability theta, double tau0_s, double nu0_dbm)
      : theta_(theta), tau0_s_(tau0_s), nu0_dbm_(nu0_dbm) {
    if (theta_.value() <= 0.0)
      throw ConfigError("threshold probability must be in (0, 1]");
    if (!std::isfinite(tau0_s_) || tau0_s_ <= 0.0)
      throw ConfigError("contact-time threshold must be positive and finite");
    if (!std::isfinite(nu0_dbm_))
      throw ConfigError("signal-strength threshold must be finite");
  }

  Probability theta() const noexcept { return theta_; }
  double tau0_s() const noexcept { return tau0_s_; }
  double nu0_dbm() const noexcept { return nu0_dbm_; }

 private:
  Probability theta_;
  double tau0_s_;
  double nu0_dbm_;
};

// Full per-user epidemic state.
struct UserState {
  Probability contact_probability{};  // p, from meetups with infected peers
  Probability symptom_probability{};  // alpha
  Probability total_probability{};    // P = p + alpha
  SymptomFlag symptom{};              // S
  bool infected = false;              // P >= theta under the owning context
  std::uint32_t traced_count = 0;     // meetups with infected peers seen so far
};

// lambda: 1 iff the devices were within the proximity threshold (nu >= nu0).
inline int transmission_gate(double nu_dbm, double nu0_dbm) {
  if (!std::isfinite(nu_dbm) || !std::isfinite(nu0_dbm))
    throw std::domain_error("signal strength must be finite");
  return nu_dbm >= nu0_dbm ? 1 : 0;
}

// omega: fraction of the peer's probability transferred by contact time,
// tau/tau0 up to the threshold and 1 beyond it.
inline double contact_fraction(double tau_s, double tau0_s) {
  if (!std::isfinite(tau_s) || !std::isfinite(tau0_s))
    throw std::domain_error("contact time must be finite");
  if (tau0_s <= 0.0) throw std::domain_error("contact-time threshold must be positive");
  if (tau_s < 0.0) throw std::domain_error("contact time must be nonnegative");
  return tau_s <= tau0_s ? tau_s / tau0_s : 1.0;
}

// mu = lambda * omega, the fraction of the peer's probability a meetup
// transfers. Zero whenever the signal gate fails, regardless of tau.
inline double infection_transition_fraction(const ContactRecord& record,
                                            const Thresholds& thresholds) {
  record.validate();
  return transmission_gate(record.signal_dbm, thresholds.nu0_dbm()) *
         contact_fraction(record.contact_time_s, thresholds.tau0_s());
}

namespace detail {

// Unclamped sum(mu_k * C_k). Records are validated before any arithmetic so
// a bad record yields no partial result.
inline double raw_contact_sum(std::span<const ContactRecord> records,
                              const Thresholds& thresholds) {
  for (const ContactRecord& r : records) r.validate();
  double sum = 0.0;
  for (const ContactRecord& r : records)
    sum += infection_transition_fraction(r, thresholds) * r.peer_probability.value();
  return sum;
}

}  // namespace detail

// p = min(1, sum(mu_k * C_k)) over a user's records; clamped once after the
// full summation, never per term.
inline Probability propagate_contacts(std::span<const ContactRecord> records,
                                      const Thresholds& thresholds) {
  return Probability::clamped(detail::raw_contact_sum(records, thresholds));
}

// alpha = S * (1 - p) * theta. Guarantees p + alpha >= theta whenever S = 1.
inline Probability symptom_probability(SymptomFlag symptom, Probability p,
                                       Probability theta) {
  return Probability(symptom.value() * (1.0 - p.value()) * theta.value());
}

struct TotalProbabilityOutcome {
  Probability value;
  bool clamp_fired = false;  // diagnostic; never fires for alpha = S(1-p)theta
};

// P = p + alpha. With alpha produced by symptom_probability the sum cannot
// exceed 1; the clamp exists for callers that pass incompatible inputs, and
// the outcome reports whether it fired.
inline TotalProbabilityOutcome total_probability_outcome(Probability p, Probability alpha) {
  const double raw = p.value() + alpha.value();
  if (raw > 1.0) return {Probability(1.0), true};
  return {Probability(raw), false};
}

inline Probability total_probability(Probability p, Probability alpha) {
  return total_probability_outcome(p, alpha).value;
}

// Folds a batch of new contact records and the current symptom flag into a
// user's state: p accumulates (running clamped sum equals a single clamp over
// the full record history), alpha and P are recomputed, infected tests
// P >= theta. The input state is not mutated.
inline UserState evaluate_user(const UserState& state,
                               std::span<const ContactRecord> records,
                               const Thresholds& thresholds) {
  UserState next = state;
  next.contact_probability = Probability::clamped(
      state.contact_probability.value() + detail::raw_contact_sum(records, thresholds));
  next.symptom_probability =
      symptom_probability(next.symptom, next.contact_probability, thresholds.theta());
  next.total_probability =
      total_probability(next.contact_probability, next.symptom_probability);
  next.infected = next.total_probability.value() >= thresholds.theta().value();
  next.traced_count = state.traced_count + static_cast<std::uint32_t>(records.size());
  return next;
}

}  // namespace fogtrace
