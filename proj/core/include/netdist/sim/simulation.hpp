#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "netdist/device_id.hpp"
#include "netdist/server.hpp"
#include "netdist/sim/world.hpp"
#include "netdist/time.hpp"

namespace netdist::sim {

enum class Compartment : std::uint8_t { kS, kE, kI, kR };
enum class ContactContext : std::uint8_t { kHousehold, kOccupation, kRandom };

std::string_view to_string(ContactContext context);

struct DailyContact {
  PersonId a = 0;
  PersonId b = 0;
  ContactContext context = ContactContext::kHousehold;
  /// At least 15 minutes; only these produce detections.
  bool long_contact = true;
  /// Distinguishes repeated contacts of one pair in one context.
  std::uint32_t index = 0;

  friend bool operator==(const DailyContact&, const DailyContact&) = default;
};

struct Transmission {
  PersonId infector = 0;
  PersonId infectee = 0;

  friend bool operator==(const Transmission&, const Transmission&) = default;
};

/// Would-be transmissions of one day, before compartments change.
struct DayTransmissions {
  /// One entry per newly exposed person (first successful contact wins).
  std::vector<Transmission> exposures;
  /// Successful draws that a precaution interrupted.
  std::vector<Transmission> blocked;
};

struct DayCounts {
  int day = 0;
  int s = 0, e = 0, i = 0, r = 0;
  int new_exposures = 0;
  int blocked = 0;
  /// Blocked targets that had no other infecting contact that day.
  int averted = 0;
  int reports = 0;
  int alert_onsets = 0;
  int precautions_active = 0;
  /// Hash of every person's compartment after the day.
  std::uint64_t state_digest = 0;

  friend bool operator==(const DayCounts&, const DayCounts&) = default;
};

struct SimParams {
  EpiParams epi;
  BehaviorModel behavior;
  ReportingParams reporting;
  AdoptionParams adoption;
  /// Feed adopters' long contacts through the signal server. Off for pure
  /// epidemic runs.
  bool use_server = true;
};

/// Throws InfeasibleConfig on out-of-range probabilities or periods.
void validate(const SimParams& params);

/// Household pairs every day, each occupation edge with probability 1/2, and a
/// Poisson number of random pairs. Pure function of (world, seed, day).
std::vector<DailyContact> sample_contacts(const SimWorld& world, const EpiParams& epi, std::uint64_t seed, int day);

struct RunResult {
  std::vector<DayCounts> history;
  double attack_rate = 0.0;
  /// Mean offspring of people infected within the first `early_days`.
  double r_eff = 0.0;
  int total_blocked = 0;
  int total_averted = 0;
  int total_reports = 0;
};

/// Day zero of every simulation, midnight UTC.
inline constexpr Timestamp kSimEpoch = 1583020800;  // 2020-03-01

/// Stable synthetic DeviceId for a person, used outside the server.
DeviceId person_device(PersonId p);

/// One replicate: SEIR over a fixed world, with adopters' contacts, reports
/// and alerts running through an in-process SignalServer.
///
/// Every random decision is a keyed draw on (seed, purpose, day, people...),
/// so paired runs that differ only in behaviour parameters see identical
/// contacts and identical transmission coins.
class Simulation {
 public:
  Simulation(std::shared_ptr<const SimWorld> world, SimParams params, std::uint64_t seed);

  void step_day();
  /// Steps until nobody is exposed or infectious, or `max_days` elapse.
  RunResult run(int max_days = 365);

  std::vector<DailyContact> sample_contacts(int day) const {
    return sim::sample_contacts(*world_, params_.epi, seed_, day);
  }
  /// Pure function of the current state; `apply_precautions` = false gives the
  /// counterfactual in which no precaution blocks anything.
  DayTransmissions transmissions(int day, const std::vector<DailyContact>& contacts,
                                 bool apply_precautions = true) const;

  int day() const { return day_; }
  bool finished() const;
  Compartment state(PersonId p) const { return state_[p]; }
  bool adopted(PersonId p) const { return device_[p].has_value(); }
  const std::optional<DeviceId>& device_of(PersonId p) const { return device_[p]; }
  bool precaution_active(PersonId p) const { return precaution_until_[p] >= day_; }
  const std::vector<DayCounts>& history() const { return history_; }
  const SimWorld& world() const { return *world_; }
  /// Null when the server is disabled.
  SignalServer* server() { return server_.get(); }

  /// Timestamp at which a day's reports are filed and charts are read.
  static Timestamp report_time(int day) { return kSimEpoch + day * kDay + 20 * kHour; }

 private:
  void emit_detections(int day, const std::vector<DailyContact>& contacts);
  int file_reports(int day);
  int process_alerts(int day);
  void start_precaution(PersonId p, int day);
  DayCounts tally(int day) const;

  std::shared_ptr<const SimWorld> world_;
  SimParams params_;
  std::uint64_t seed_;
  int day_ = 0;
  std::vector<Compartment> state_;
  std::vector<int> since_;
  std::vector<int> offspring_;
  std::vector<int> infected_on_;
  std::vector<std::optional<DeviceId>> device_;
  std::vector<int> precaution_until_;
  std::vector<std::size_t> seen_signals_;
  std::vector<std::vector<PersonId>> neighbors_;
  std::unique_ptr<SignalServer> server_;
  std::vector<DayCounts> history_;
};

}  // namespace netdist::sim
