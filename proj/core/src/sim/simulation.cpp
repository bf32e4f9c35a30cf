#include "netdist/sim/simulation.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <unordered_set>

#include "netdist/entropy.hpp"

namespace netdist::sim {

namespace {

enum : std::uint64_t {
  kTagSeeds = 0x5eed,
  kTagOccupation,
  kTagRandom,
  kTagTransmit,
  kTagBlock,
  kTagReport,
  kTagContactToken,
  kTagContactRedeem,
  kTagP1,
  kTagP3,
  kTagTemp,
  kTagTime,
  kTagEntropy,
  kTagDigest,
};

constexpr const char* kAuthority = "sim-health";
constexpr const char* kAuthoritySecret = "sim-health-secret";

std::uint64_t u(int v) { return static_cast<std::uint64_t>(static_cast<std::int64_t>(v)); }

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw InfeasibleConfig(std::string(what) + " must be in [0, 1]");
}

ServiceConfig sim_service_config() {
  ServiceConfig config;
  config.tokens.authorities.push_back(AuthorityConfig{kAuthority, kAuthoritySecret, {}});
  config.server.fsync = false;
  return config;
}

}  // namespace

std::string_view to_string(ContactContext context) {
  switch (context) {
    case ContactContext::kHousehold:
      return "HOUSEHOLD";
    case ContactContext::kOccupation:
      return "OCCUPATION";
    case ContactContext::kRandom:
      return "RANDOM";
  }
  return "?";
}

void validate(const SimParams& params) {
  const auto& e = params.epi;
  check_probability(e.transmission_prob, "transmission_prob");
  if (e.latent_days < 1 || e.infectious_days < 1) throw InfeasibleConfig("epidemic periods must be at least 1 day");
  if (e.initial_seeds < 0) throw InfeasibleConfig("initial_seeds must be non-negative");
  if (!(e.random_contacts_per_day >= 0.0)) throw InfeasibleConfig("random_contacts_per_day must be non-negative");
  const auto& b = params.behavior;
  check_probability(b.p1, "p1");
  check_probability(b.p2, "p2");
  check_probability(b.p3, "p3");
  if (b.alert_distance < 1 || b.alert_distance > kDefaultMaxDistance) {
    throw InfeasibleConfig("alert_distance must be in [1, 12]");
  }
  if (b.precaution_days < 1) throw InfeasibleConfig("precaution_days must be at least 1");
  check_probability(params.reporting.positive_report_prob, "positive_report_prob");
  check_probability(params.reporting.contact_token_prob, "contact_token_prob");
  check_probability(params.reporting.contact_redeem_prob, "contact_redeem_prob");
  check_probability(params.adoption.rate, "adoption rate");
  check_probability(params.adoption.household_correlation, "household_correlation");
}

DeviceId person_device(PersonId p) {
  std::array<std::uint8_t, 16> bytes{};
  const std::uint64_t h = mix64(p);
  for (int i = 0; i < 8; ++i) bytes[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(h >> (8 * i));
  for (int i = 0; i < 4; ++i) bytes[static_cast<std::size_t>(12 + i)] = static_cast<std::uint8_t>(p >> (8 * i));
  bytes[6] = static_cast<std::uint8_t>((bytes[6] & 0x0f) | 0x40);
  bytes[8] = static_cast<std::uint8_t>((bytes[8] & 0x3f) | 0x80);
  return DeviceId(bytes);
}

Simulation::Simulation(std::shared_ptr<const SimWorld> world, SimParams params, std::uint64_t seed)
    : world_(std::move(world)), params_(std::move(params)), seed_(seed) {
  validate(params_);
  const auto n = world_->size();
  state_.assign(n, Compartment::kS);
  since_.assign(n, 0);
  offspring_.assign(n, 0);
  infected_on_.assign(n, -1);
  device_.assign(n, std::nullopt);
  precaution_until_.assign(n, -1);
  seen_signals_.assign(n, 0);
  neighbors_ = structural_neighbors(*world_);

  const auto draws = adoption_draws(*world_, params_.adoption, seed_);
  if (params_.use_server) {
    server_ = std::make_unique<SignalServer>(sim_service_config(),
                                             std::make_shared<SeededEntropy>(keyed_hash({seed_, kTagEntropy})));
  }
  for (PersonId p = 0; p < n; ++p) {
    if (draws[p] < params_.adoption.rate) {
      device_[p] = server_ ? server_->register_device() : person_device(p);
    }
  }

  std::vector<PersonId> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(keyed_hash({seed_, kTagSeeds}));
  std::shuffle(order.begin(), order.end(), rng);
  const auto seeds = std::min<std::size_t>(static_cast<std::size_t>(params_.epi.initial_seeds), n);
  for (std::size_t i = 0; i < seeds; ++i) {
    state_[order[i]] = Compartment::kI;
    infected_on_[order[i]] = 0;
  }
}

std::vector<DailyContact> sample_contacts(const SimWorld& world, const EpiParams& epi, std::uint64_t seed, int day) {
  std::vector<DailyContact> out;
  for (const auto& hh : world.households) {
    for (std::size_t i = 0; i < hh.size(); ++i) {
      for (std::size_t j = i + 1; j < hh.size(); ++j) {
        out.push_back({hh[i], hh[j], ContactContext::kHousehold, true, 0});
      }
    }
  }
  for (std::size_t g = 0; g < world.occupation_nets.size(); ++g) {
    const auto& edges = world.occupation_nets[g].edges;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (keyed_uniform({seed, kTagOccupation, g, e, u(day)}) < 0.5) {
        out.push_back({edges[e].first, edges[e].second, ContactContext::kOccupation, true, static_cast<std::uint32_t>(g)});
      }
    }
  }
  const auto n = static_cast<PersonId>(world.size());
  if (n >= 2 && epi.random_contacts_per_day > 0.0) {
    std::mt19937_64 rng(keyed_hash({seed, kTagRandom, u(day)}));
    std::poisson_distribution<int> count(epi.random_contacts_per_day * n / 2.0);
    std::uniform_int_distribution<PersonId> pick(0, n - 1);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    const int m = count(rng);
    for (int k = 0; k < m; ++k) {
      const PersonId a = pick(rng);
      PersonId b = pick(rng);
      while (b == a) b = pick(rng);
      const bool long_contact = coin(rng) < world.population.random_long_fraction;
      out.push_back({std::min(a, b), std::max(a, b), ContactContext::kRandom, long_contact, static_cast<std::uint32_t>(k)});
    }
  }
  return out;
}

DayTransmissions Simulation::transmissions(int day, const std::vector<DailyContact>& contacts,
                                           bool apply_precautions) const {
  DayTransmissions out;
  std::unordered_set<PersonId> exposed;
  const double beta = params_.epi.transmission_prob;
  for (const auto& c : contacts) {
    PersonId infector;
    PersonId target;
    if (state_[c.a] == Compartment::kI && state_[c.b] == Compartment::kS) {
      infector = c.a;
      target = c.b;
    } else if (state_[c.b] == Compartment::kI && state_[c.a] == Compartment::kS) {
      infector = c.b;
      target = c.a;
    } else {
      continue;
    }
    const auto ctx = static_cast<std::uint64_t>(c.context);
    if (keyed_uniform({seed_, kTagTransmit, u(day), ctx, c.a, c.b, c.index}) >= beta) continue;
    bool blocked = false;
    if (apply_precautions) {
      for (PersonId party : {c.a, c.b}) {
        if (precaution_until_[party] >= day &&
            keyed_uniform({seed_, kTagBlock, u(day), ctx, c.a, c.b, c.index, party}) < params_.behavior.p2) {
          blocked = true;
        }
      }
    }
    if (blocked) {
      out.blocked.push_back({infector, target});
    } else if (exposed.insert(target).second) {
      out.exposures.push_back({infector, target});
    }
  }
  return out;
}

void Simulation::emit_detections(int day, const std::vector<DailyContact>& contacts) {
  std::set<std::pair<PersonId, PersonId>> pairs;
  for (const auto& c : contacts) {
    if (c.long_contact && adopted(c.a) && adopted(c.b)) pairs.emplace(c.a, c.b);
  }
  auto temp_id = [&](PersonId p) { return "t" + hex64(keyed_hash({seed_, kTagTemp, p, u(day)})); };
  for (auto [a, b] : pairs) {
    const Timestamp t0 = kSimEpoch + day * kDay + 8 * kHour +
                         static_cast<Timestamp>(keyed_hash({seed_, kTagTime, u(day), a, b}) % 600) * kMinute;
    const auto ta = temp_id(a);
    const auto tb = temp_id(b);
    // Each side scans twice; together the samples span 15 minutes.
    const struct {
      PersonId who;
      const std::string& own;
      const std::string& peer;
      Seconds offset;
    } samples[] = {{a, ta, tb, 0}, {b, tb, ta, 5 * kMinute}, {a, ta, tb, 10 * kMinute}, {b, tb, ta, 15 * kMinute}};
    for (const auto& s : samples) {
      DetectionRecord rec;
      rec.reporter = *device_[s.who];
      rec.channel = Channel::kBle;
      rec.own_temp_id = s.own;
      rec.peer_temp_id = s.peer;
      rec.timestamp = t0 + s.offset;
      rec.rssi = -60;
      server_->ingest_detection(rec, rec.timestamp);
    }
  }
}

int Simulation::file_reports(int day) {
  const Timestamp now = report_time(day);
  const Date today = date_of(kSimEpoch + day * kDay);
  int filed = 0;
  auto file = [&](PersonId p, CaseKind kind) {
    auto tokens = server_->issue_tokens(kAuthority, kAuthoritySecret, kind, 1, now);
    auto result = server_->redeem(tokens.front().token, *device_[p],
                                  kind == CaseKind::kPositive ? std::optional<Date>(today) : std::nullopt, now);
    if (std::holds_alternative<CaseReport>(result)) ++filed;
  };
  const auto& rp = params_.reporting;
  for (PersonId p = 0; p < world_->size(); ++p) {
    if (state_[p] != Compartment::kI || since_[p] != day || !adopted(p)) continue;
    if (keyed_uniform({seed_, kTagReport, p}) >= rp.positive_report_prob) continue;
    file(p, CaseKind::kPositive);
    for (PersonId m : world_->households[world_->household_of[p]]) {
      if (m == p || !adopted(m)) continue;
      if (keyed_uniform({seed_, kTagContactToken, p, m}) < rp.contact_token_prob &&
          keyed_uniform({seed_, kTagContactRedeem, p, m}) < rp.contact_redeem_prob) {
        file(m, CaseKind::kContact);
      }
    }
  }
  return filed;
}

void Simulation::start_precaution(PersonId p, int day) {
  if (keyed_uniform({seed_, kTagP1, p, u(day)}) < params_.behavior.p1) {
    precaution_until_[p] = std::max(precaution_until_[p], day + params_.behavior.precaution_days);
  }
}

int Simulation::process_alerts(int day) {
  const Timestamp now = report_time(day);
  const auto& bm = params_.behavior;
  std::vector<bool> informed(world_->size(), false);
  int onsets = 0;
  for (PersonId p = 0; p < world_->size(); ++p) {
    if (!adopted(p)) continue;
    // Each newly pinned nearby case is a fresh prompt to act.
    const auto fresh = server_->charts().signals_for(*device_[p], seen_signals_[p]);
    int nearest = 0;
    for (const auto& s : fresh) {
      if (s.distance <= bm.alert_distance && s.visible_until > now && (nearest == 0 || s.distance < nearest)) {
        nearest = s.distance;
      }
    }
    seen_signals_[p] += fresh.size();
    if (nearest == 0) continue;
    ++onsets;
    start_precaution(p, day);
    // Word of mouth reaches non-users one hop further out.
    if (nearest + 1 > bm.alert_distance) continue;
    for (PersonId n : neighbors_[p]) {
      if (adopted(n) || informed[n]) continue;
      if (keyed_uniform({seed_, kTagP3, p, n, u(day)}) >= bm.p3) continue;
      informed[n] = true;
      ++onsets;
      start_precaution(n, day);
    }
  }
  return onsets;
}

void Simulation::step_day() {
  const int day = day_;
  const auto contacts = sample_contacts(day);
  if (server_) emit_detections(day, contacts);
  const auto tx = transmissions(day, contacts, true);

  DayCounts counts;
  if (server_) {
    counts.reports = file_reports(day);
    counts.alert_onsets = process_alerts(day);
  }

  std::unordered_set<PersonId> exposed_targets;
  for (const auto& t : tx.exposures) exposed_targets.insert(t.infectee);
  std::unordered_set<PersonId> averted;
  for (const auto& t : tx.blocked) {
    if (!exposed_targets.contains(t.infectee)) averted.insert(t.infectee);
  }

  for (PersonId p = 0; p < world_->size(); ++p) {
    switch (state_[p]) {
      case Compartment::kI:
        if (day + 1 - since_[p] >= params_.epi.infectious_days) {
          state_[p] = Compartment::kR;
          since_[p] = day + 1;
        }
        break;
      case Compartment::kE:
        if (day + 1 - since_[p] >= params_.epi.latent_days) {
          state_[p] = Compartment::kI;
          since_[p] = day + 1;
        }
        break;
      default:
        break;
    }
  }
  for (const auto& t : tx.exposures) {
    ++offspring_[t.infector];
    infected_on_[t.infectee] = day;
    state_[t.infectee] = Compartment::kE;
    since_[t.infectee] = day;
    if (params_.epi.latent_days <= 1) {
      state_[t.infectee] = Compartment::kI;
      since_[t.infectee] = day + 1;
    }
  }

  const auto tallied = tally(day);
  counts.day = day;
  counts.s = tallied.s;
  counts.e = tallied.e;
  counts.i = tallied.i;
  counts.r = tallied.r;
  counts.state_digest = tallied.state_digest;
  counts.precautions_active = tallied.precautions_active;
  counts.new_exposures = static_cast<int>(tx.exposures.size());
  counts.blocked = static_cast<int>(tx.blocked.size());
  counts.averted = static_cast<int>(averted.size());
  history_.push_back(counts);
  ++day_;
}

DayCounts Simulation::tally(int day) const {
  DayCounts c;
  std::uint64_t digest = keyed_hash({kTagDigest, u(day)});
  for (PersonId p = 0; p < world_->size(); ++p) {
    switch (state_[p]) {
      case Compartment::kS:
        ++c.s;
        break;
      case Compartment::kE:
        ++c.e;
        break;
      case Compartment::kI:
        ++c.i;
        break;
      case Compartment::kR:
        ++c.r;
        break;
    }
    if (precaution_until_[p] > day) ++c.precautions_active;
    digest = mix64(digest ^ (static_cast<std::uint64_t>(state_[p]) + 4 * static_cast<std::uint64_t>(since_[p])));
  }
  c.state_digest = digest;
  return c;
}

bool Simulation::finished() const {
  return std::ranges::none_of(state_, [](Compartment c) { return c == Compartment::kE || c == Compartment::kI; });
}

RunResult Simulation::run(int max_days) {
  while (!finished() && day_ < max_days) step_day();
  RunResult result;
  result.history = history_;
  const auto n = world_->size();
  std::size_t ever = 0;
  for (PersonId p = 0; p < n; ++p) {
    if (state_[p] != Compartment::kS) ++ever;
  }
  result.attack_rate = n == 0 ? 0.0 : static_cast<double>(ever) / static_cast<double>(n);
  constexpr int kEarlyDays = 20;
  int early = 0;
  int early_offspring = 0;
  for (PersonId p = 0; p < n; ++p) {
    if (infected_on_[p] >= 0 && infected_on_[p] < kEarlyDays) {
      ++early;
      early_offspring += offspring_[p];
    }
  }
  result.r_eff = early == 0 ? 0.0 : static_cast<double>(early_offspring) / early;
  for (const auto& d : history_) {
    result.total_blocked += d.blocked;
    result.total_averted += d.averted;
    result.total_reports += d.reports;
  }
  return result;
}

}  // namespace netdist::sim
