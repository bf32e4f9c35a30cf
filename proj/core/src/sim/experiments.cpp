#include "netdist/sim/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>

#include "netdist/entropy.hpp"
#include "netdist/graph.hpp"

namespace netdist::sim {

using nlohmann::json;

namespace {

enum : std::uint64_t { kTagWorldSeed = 0x3001, kTagRunSeed, kTagViewers, kTagPairs, kTagAttack };

/// Runs fn(0..n-1) on a small thread pool. Each call must touch only its own
/// output slot.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct Summary {
  double mean = 0.0;
  double ci95 = 0.0;
};

/// Normal-approximation 95% interval half-width.
Summary summarize(const std::vector<double>& xs) {
  Summary s;
  if (xs.empty()) return s;
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() < 2) return s;
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  s.ci95 = 1.96 * sd / std::sqrt(static_cast<double>(xs.size()));
  return s;
}

struct UnionFind {
  std::vector<std::uint32_t> parent;
  std::vector<std::uint32_t> size;

  explicit UnionFind(std::size_t n) : parent(n), size(n, 1) { std::iota(parent.begin(), parent.end(), 0u); }

  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size[a] < size[b]) std::swap(a, b);
    parent[b] = a;
    size[a] += size[b];
  }
};

ContactGraph person_graph(std::size_t n, const std::vector<Edge>& edges, const std::vector<bool>* members) {
  std::vector<DeviceId> nodes;
  std::vector<ContactEdge> cedges;
  for (PersonId p = 0; p < n; ++p) {
    if (members == nullptr || (*members)[p]) nodes.push_back(person_device(p));
  }
  for (auto [a, b] : edges) {
    if (members == nullptr || ((*members)[a] && (*members)[b])) {
      cedges.push_back({person_device(a), person_device(b), 0});
    }
  }
  return ContactGraph::build(std::move(nodes), std::move(cedges), 0);
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) it->get_to(out);
}

bool enabled(const json& j) { return !j.is_object() || j.value("enabled", true); }

}  // namespace

std::vector<Edge> contact_union(const SimWorld& world, const EpiParams& epi, std::uint64_t seed, int days) {
  std::vector<Edge> out;
  for (int day = 0; day < days; ++day) {
    for (const auto& c : sample_contacts(world, epi, seed, day)) {
      if (c.long_contact) out.emplace_back(c.a, c.b);
    }
  }
  std::ranges::sort(out);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

PopulationConfig campus_population() {
  PopulationConfig c;
  c.people = 3000;
  c.household_size_weights = {0.5, 0.5};
  c.occupations = {OccupationLayer{1.0, 60, 26, 0.05}};
  c.random_long_fraction = 0.5;
  return c;
}

EpiParams campus_epi() {
  EpiParams e;
  e.random_contacts_per_day = 0.4;
  return e;
}

std::uint64_t world_seed(std::uint64_t seed, int replicate) {
  return keyed_hash({seed, kTagWorldSeed, static_cast<std::uint64_t>(replicate)});
}

std::uint64_t run_seed(std::uint64_t seed, int replicate) {
  return keyed_hash({seed, kTagRunSeed, static_cast<std::uint64_t>(replicate)});
}

// ---------------------------------------------------------------------------

double largest_cluster_fraction(std::size_t n, const std::vector<Edge>& edges, const std::vector<bool>& members) {
  const auto count = static_cast<std::size_t>(std::ranges::count(members, true));
  if (count == 0) return 0.0;
  UnionFind uf(n);
  for (auto [a, b] : edges) {
    if (members[a] && members[b]) uf.unite(a, b);
  }
  std::uint32_t best = 0;
  for (PersonId p = 0; p < n; ++p) {
    if (members[p] && uf.find(p) == p) best = std::max(best, uf.size[p]);
  }
  return static_cast<double>(best) / static_cast<double>(count);
}

CriticalMassResult exp_critical_mass(const PopulationConfig& population, const EpiParams& epi,
                                     const CriticalMassConfig& config, std::uint64_t seed) {
  if (config.replicates < 1) throw InfeasibleConfig("critical_mass.replicates must be positive");
  const auto rates = config.adoption_rates.size();
  std::vector<std::vector<double>> fractions(rates, std::vector<double>(static_cast<std::size_t>(config.replicates)));
  std::vector<std::vector<double>> connections(rates, std::vector<double>(static_cast<std::size_t>(config.replicates)));
  std::vector<double> mean_degree(static_cast<std::size_t>(config.replicates));
  std::vector<double> median_degree(static_cast<std::size_t>(config.replicates));

  parallel_for(static_cast<std::size_t>(config.replicates), [&](std::size_t r) {
    const int rep = static_cast<int>(r);
    const auto world = generate_world(population, world_seed(seed, rep));
    const auto rs = run_seed(seed, rep);
    const auto edges = contact_union(world, epi, rs, config.window_days);
    const auto n = world.size();

    std::vector<std::size_t> degree(n, 0);
    for (auto [a, b] : edges) {
      ++degree[a];
      ++degree[b];
    }
    mean_degree[r] = n == 0 ? 0.0 : 2.0 * static_cast<double>(edges.size()) / static_cast<double>(n);
    auto sorted = degree;
    std::ranges::sort(sorted);
    median_degree[r] = n == 0 ? 0.0
                       : n % 2 == 1 ? static_cast<double>(sorted[n / 2])
                                    : 0.5 * static_cast<double>(sorted[n / 2 - 1] + sorted[n / 2]);

    const auto draws = adoption_draws(world, AdoptionParams{0.0, config.household_correlation}, rs);
    for (std::size_t k = 0; k < rates; ++k) {
      std::vector<bool> members(n);
      for (PersonId p = 0; p < n; ++p) members[p] = draws[p] < config.adoption_rates[k];
      fractions[k][r] = largest_cluster_fraction(n, edges, members);

      std::vector<PersonId> adopters;
      for (PersonId p = 0; p < n; ++p) {
        if (members[p]) adopters.push_back(p);
      }
      if (adopters.empty() || config.viewers <= 0) {
        connections[k][r] = 0.0;
        continue;
      }
      std::mt19937_64 rng(keyed_hash({rs, kTagViewers, k}));
      std::shuffle(adopters.begin(), adopters.end(), rng);
      adopters.resize(std::min(adopters.size(), static_cast<std::size_t>(config.viewers)));
      const auto graph = person_graph(n, edges, &members);
      double total = 0.0;
      for (PersonId v : adopters) total += static_cast<double>(graph.user_count_histogram(person_device(v)).total());
      connections[k][r] = total / static_cast<double>(adopters.size());
    }
  });

  CriticalMassResult result;
  result.mean_degree = summarize(mean_degree).mean;
  result.median_degree = summarize(median_degree).mean;
  for (std::size_t k = 0; k < rates; ++k) {
    const auto f = summarize(fractions[k]);
    result.rows.push_back({config.adoption_rates[k], f.mean, f.ci95, summarize(connections[k]).mean});
  }
  for (const auto& row : result.rows) {
    if (row.mean_cluster_fraction >= 0.5 && (!result.knee || row.adoption < *result.knee)) result.knee = row.adoption;
  }
  return result;
}

// ---------------------------------------------------------------------------

std::vector<DistancePair> sample_distance_pairs(std::size_t n, const std::vector<Edge>& edges,
                                                const std::vector<bool>& adopters, int pairs, int sources,
                                                std::uint64_t seed) {
  std::vector<PersonId> pool;
  for (PersonId p = 0; p < n; ++p) {
    if (adopters[p]) pool.push_back(p);
  }
  std::vector<DistancePair> out;
  if (pool.size() < 2 || pairs <= 0) return out;
  sources = std::max(1, std::min(sources, pairs));
  const auto full = person_graph(n, edges, nullptr);
  const auto reported = person_graph(n, edges, &adopters);

  std::mt19937_64 rng(keyed_hash({seed, kTagPairs}));
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  auto to_distance = [](std::uint8_t level) {
    return level == ContactGraph::kUnreached ? NetworkDistance::beyond() : NetworkDistance::hops(level);
  };
  for (int s = 0; s < sources; ++s) {
    const PersonId src = pool[pick(rng)];
    const ContactGraph::Index fs = *full.index_of(person_device(src));
    const ContactGraph::Index rsrc = *reported.index_of(person_device(src));
    const auto true_levels = full.bfs_levels(std::span(&fs, 1));
    const auto rep_levels = reported.bfs_levels(std::span(&rsrc, 1));
    const int quota = pairs / sources + (s < pairs % sources ? 1 : 0);
    for (int q = 0; q < quota; ++q) {
      PersonId dst = pool[pick(rng)];
      while (dst == src) dst = pool[pick(rng)];
      DistancePair pair{src, dst};
      pair.true_distance = to_distance(true_levels[*full.index_of(person_device(dst))]);
      pair.reported = to_distance(rep_levels[*reported.index_of(person_device(dst))]);
      out.push_back(pair);
    }
  }
  return out;
}

std::vector<DistortionRow> exp_distance_distortion(const SimWorld& world, const EpiParams& epi,
                                                   const DistortionConfig& config, std::uint64_t seed) {
  const auto edges = contact_union(world, epi, seed, config.window_days);
  const auto draws = adoption_draws(world, AdoptionParams{}, seed);
  std::vector<DistortionRow> rows(config.adoption_rates.size());
  parallel_for(rows.size(), [&](std::size_t k) {
    DistortionRow& row = rows[k];
    row.adoption = config.adoption_rates[k];
    std::vector<bool> adopters(world.size());
    for (PersonId p = 0; p < world.size(); ++p) adopters[p] = draws[p] < row.adoption;
    const auto pairs = sample_distance_pairs(world.size(), edges, adopters, config.pairs, config.sources,
                                             keyed_hash({seed, k}));
    row.pairs = static_cast<int>(pairs.size());
    std::vector<int> excess;
    for (const auto& p : pairs) {
      if (p.true_distance.is_beyond()) {
        ++row.true_beyond;
        if (!p.reported.is_beyond()) ++row.violations;
        continue;
      }
      if (p.reported.is_beyond()) {
        ++row.reported_beyond;
        continue;
      }
      const int delta = p.reported.value() - p.true_distance.value();
      if (delta < 0) ++row.violations;
      excess.push_back(delta);
    }
    row.finite_pairs = static_cast<int>(excess.size());
    row.beyond_fraction = row.pairs == 0 ? 0.0
                                         : static_cast<double>(row.reported_beyond + row.true_beyond) / row.pairs;
    if (!excess.empty()) {
      std::ranges::sort(excess);
      auto q = [&](double f) { return excess[static_cast<std::size_t>(f * static_cast<double>(excess.size() - 1))]; };
      row.q10 = q(0.1);
      row.q50 = q(0.5);
      row.q90 = q(0.9);
      row.max_excess = excess.back();
      row.mean_excess = std::accumulate(excess.begin(), excess.end(), 0.0) / static_cast<double>(excess.size());
      row.excess_histogram.assign(static_cast<std::size_t>(std::max(0, row.max_excess)) + 1, 0);
      for (int d : excess) {
        if (d >= 0) ++row.excess_histogram[static_cast<std::size_t>(d)];
      }
    }
  });
  return rows;
}

// ---------------------------------------------------------------------------

bool same_trajectory(const std::vector<DayCounts>& a, const std::vector<DayCounts>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a[i];
    const auto& y = b[i];
    if (x.day != y.day || x.s != y.s || x.e != y.e || x.i != y.i || x.r != y.r ||
        x.new_exposures != y.new_exposures || x.state_digest != y.state_digest) {
      return false;
    }
  }
  return true;
}

std::vector<InterventionScenario> p1_sweep(double p2, double adoption, std::vector<double> p1_values) {
  std::vector<InterventionScenario> out;
  for (double p1 : p1_values) {
    InterventionScenario s;
    s.label = "p1=" + std::to_string(p1).substr(0, 4);
    s.behavior.p1 = p1;
    s.behavior.p2 = p2;
    s.adoption = adoption;
    out.push_back(s);
  }
  return out;
}

InterventionResult exp_intervention_impact(const PopulationConfig& population, const SimParams& base,
                                           const InterventionConfig& config, std::uint64_t seed) {
  if (config.replicates < 1) throw InfeasibleConfig("intervention.replicates must be positive");
  const auto reps = static_cast<std::size_t>(config.replicates);
  const auto scenarios = config.scenarios.size();
  for (const auto& s : config.scenarios) {
    SimParams p = base;
    p.behavior = s.behavior;
    p.adoption.rate = s.adoption;
    validate(p);
  }

  std::vector<std::shared_ptr<const SimWorld>> worlds(reps);
  parallel_for(reps, [&](std::size_t r) {
    worlds[r] = std::make_shared<const SimWorld>(generate_world(population, world_seed(seed, static_cast<int>(r))));
  });

  // Slot 0 of each replicate is the baseline: no behaviour, no server.
  const std::size_t per_rep = scenarios + 1;
  std::vector<RunResult> runs(reps * per_rep);
  parallel_for(runs.size(), [&](std::size_t job) {
    const std::size_t r = job / per_rep;
    const std::size_t slot = job % per_rep;
    SimParams p = base;
    if (slot == 0) {
      p.behavior = BehaviorModel{};
      p.use_server = false;
    } else {
      p.behavior = config.scenarios[slot - 1].behavior;
      p.adoption.rate = config.scenarios[slot - 1].adoption;
      p.use_server = true;
    }
    Simulation sim(worlds[r], p, run_seed(seed, static_cast<int>(r)));
    runs[job] = sim.run(config.max_days);
  });

  InterventionResult result;
  std::vector<double> base_attack(reps);
  std::vector<double> base_r(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    base_attack[r] = runs[r * per_rep].attack_rate;
    base_r[r] = runs[r * per_rep].r_eff;
  }
  result.baseline_attack_rate = summarize(base_attack).mean;
  result.baseline_r_eff = summarize(base_r).mean;
  for (std::size_t s = 0; s < scenarios; ++s) {
    std::vector<double> attack(reps), delta(reps), r_eff(reps), blocked(reps), averted(reps);
    InterventionRow row;
    row.scenario = config.scenarios[s];
    row.replicates = config.replicates;
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& run = runs[r * per_rep + s + 1];
      attack[r] = run.attack_rate;
      delta[r] = run.attack_rate - base_attack[r];
      r_eff[r] = run.r_eff;
      blocked[r] = run.total_blocked;
      averted[r] = run.total_averted;
      if (same_trajectory(run.history, runs[r * per_rep].history)) ++row.identical_to_baseline;
    }
    const auto a = summarize(attack);
    const auto d = summarize(delta);
    row.mean_attack_rate = a.mean;
    row.ci95_attack_rate = a.ci95;
    row.mean_delta = d.mean;
    row.ci95_delta = d.ci95;
    row.mean_r_eff = summarize(r_eff).mean;
    row.mean_blocked = summarize(blocked).mean;
    row.mean_averted = summarize(averted).mean;
    result.rows.push_back(row);
    result.attack_rates.push_back(std::move(attack));
  }
  return result;
}

// ---------------------------------------------------------------------------

std::string_view to_string(AttackScenario scenario) {
  switch (scenario) {
    case AttackScenario::kNeverMet:
      return "never-met";
    case AttackScenario::kMet:
      return "met";
    case AttackScenario::kConfounder:
      return "confounder";
  }
  return "?";
}

std::string_view to_string(Deduction deduction) {
  switch (deduction) {
    case Deduction::kTrueNegative:
      return "true-negative";
    case Deduction::kTruePositive:
      return "true-positive";
    case Deduction::kFalsePositive:
      return "false-positive";
    case Deduction::kFalseNegative:
      return "false-negative";
  }
  return "?";
}

AttackOutcome run_copresence_attack(AttackScenario scenario, std::uint64_t seed) {
  ServiceConfig config;
  config.tokens.authorities.push_back(AuthorityConfig{"clinic", "clinic-secret", {}});
  SignalServer server(config, std::make_shared<SeededEntropy>(keyed_hash({seed, kTagAttack})));

  const DeviceId a = server.register_device();
  const DeviceId b = server.register_device();
  const DeviceId a_prime = server.register_device();
  const DeviceId b_prime = server.register_device();
  const DeviceId c = server.register_device();
  const Timestamp day0 = kSimEpoch;

  int next_temp = 0;
  // Both phones scan every 5 minutes while together.
  auto together = [&](const DeviceId& x, const DeviceId& y, Timestamp start, int minutes) {
    const std::string tx = "atk" + std::to_string(next_temp++);
    const std::string ty = "atk" + std::to_string(next_temp++);
    for (int m = 0; m <= minutes; m += 5) {
      for (const auto& [who, own, peer] : {std::tuple{x, tx, ty}, std::tuple{y, ty, tx}}) {
        DetectionRecord rec;
        rec.reporter = who;
        rec.channel = Channel::kBle;
        rec.own_temp_id = own;
        rec.peer_temp_id = peer;
        rec.timestamp = start + m * kMinute;
        rec.rssi = -58;
        server.ingest_detection(rec, rec.timestamp);
      }
    }
  };

  // Attackers attach to their targets for 20 minutes.
  together(a_prime, a, day0 + 9 * kHour, 20);
  together(b_prime, b, day0 + 10 * kHour, 20);
  const bool met = scenario == AttackScenario::kMet;
  if (met) together(a, b, day0 + 12 * kHour, 20);
  if (scenario == AttackScenario::kConfounder) {
    // C knows B, and happened to stand next to A' during the attachment.
    together(c, b, day0 + 13 * kHour, 30);
    together(c, a_prime, day0 + 9 * kHour, 20);
  }

  const Timestamp report_at = day0 + kDay + 10 * kHour;
  auto token = server.issue_tokens("clinic", "clinic-secret", CaseKind::kPositive, 1, report_at).front();
  server.redeem(token.token, a_prime, date_of(report_at), report_at);

  AttackOutcome out;
  out.scenario = scenario;
  out.targets_met = met;
  const auto chart = server.chart(b_prime, report_at + kMinute);
  for (std::size_t i = 0; i < chart.positive.size(); ++i) {
    if (chart.positive[i] > 0) {
      out.nearest_signal = static_cast<int>(i) + 1;
      break;
    }
  }
  const bool signal = out.nearest_signal && *out.nearest_signal <= 3;
  out.deduction = signal ? (met ? Deduction::kTruePositive : Deduction::kFalsePositive)
                         : (met ? Deduction::kFalseNegative : Deduction::kTrueNegative);
  return out;
}

std::vector<AttackOutcome> exp_copresence_attack(std::uint64_t seed) {
  return {run_copresence_attack(AttackScenario::kNeverMet, seed), run_copresence_attack(AttackScenario::kMet, seed),
          run_copresence_attack(AttackScenario::kConfounder, seed)};
}

// ---------------------------------------------------------------------------

ScenarioConfig scenario_from_json(const json& j) {
  ScenarioConfig c;
  read(j, "seed", c.seed);
  if (j.value("preset", std::string{}) == "campus") {
    c.population = campus_population();
    c.params.epi = campus_epi();
  } else if (j.contains("preset")) {
    throw InfeasibleConfig("unknown preset '" + j.at("preset").get<std::string>() + "'");
  }
  read(j, "population", c.population);
  read(j, "epi", c.params.epi);
  read(j, "behavior", c.params.behavior);
  read(j, "reporting", c.params.reporting);
  read(j, "adoption", c.params.adoption);
  read(j, "max_days", c.max_days);
  validate(c.params);

  const json experiments = j.value("experiments", json::object());
  if (auto it = experiments.find("critical_mass"); it != experiments.end() && enabled(*it)) {
    CriticalMassConfig cm;
    read(*it, "adoption_rates", cm.adoption_rates);
    read(*it, "replicates", cm.replicates);
    read(*it, "viewers", cm.viewers);
    read(*it, "window_days", cm.window_days);
    read(*it, "household_correlation", cm.household_correlation);
    c.critical_mass = cm;
  }
  if (auto it = experiments.find("distortion"); it != experiments.end() && enabled(*it)) {
    DistortionConfig dc;
    read(*it, "adoption_rates", dc.adoption_rates);
    read(*it, "pairs", dc.pairs);
    read(*it, "sources", dc.sources);
    read(*it, "window_days", dc.window_days);
    c.distortion = dc;
  }
  if (auto it = experiments.find("intervention"); it != experiments.end() && enabled(*it)) {
    InterventionConfig ic;
    ic.max_days = c.max_days;
    read(*it, "replicates", ic.replicates);
    if (auto sc = it->find("scenarios"); sc != it->end()) {
      for (const auto& s : *sc) {
        InterventionScenario scenario;
        scenario.label = s.value("label", std::string{});
        scenario.behavior = c.params.behavior;
        read(s, "behavior", scenario.behavior);
        scenario.adoption = s.value("adoption", c.params.adoption.rate);
        ic.scenarios.push_back(scenario);
      }
    } else {
      ic.scenarios = p1_sweep(it->value("p2", 0.5), it->value("adoption", c.params.adoption.rate),
                              it->value("p1", std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0}));
    }
    c.intervention = ic;
  }
  if (auto it = experiments.find("copresence_attack"); it != experiments.end() && enabled(*it)) {
    c.copresence_attack = true;
  }
  return c;
}

void write_critical_mass_csv(std::ostream& out, const CriticalMassResult& result) {
  out << "adoption,cluster_fraction,ci95,connections_in_chart,mean_degree,median_degree\n";
  for (const auto& r : result.rows) {
    out << r.adoption << ',' << r.mean_cluster_fraction << ',' << r.ci95_cluster_fraction << ','
        << r.mean_connections << ',' << result.mean_degree << ',' << result.median_degree << '\n';
  }
}

void write_distortion_csv(std::ostream& out, const std::vector<DistortionRow>& rows) {
  out << "adoption,pairs,finite_pairs,reported_beyond,true_beyond,beyond_fraction,violations,mean_excess,q10,q50,"
         "q90,max_excess\n";
  for (const auto& r : rows) {
    out << r.adoption << ',' << r.pairs << ',' << r.finite_pairs << ',' << r.reported_beyond << ',' << r.true_beyond
        << ',' << r.beyond_fraction << ',' << r.violations << ',' << r.mean_excess << ',' << r.q10 << ',' << r.q50
        << ',' << r.q90 << ',' << r.max_excess << '\n';
  }
}

void write_intervention_csv(std::ostream& out, const InterventionResult& result) {
  out << "label,p1,p2,p3,adoption,replicates,attack_rate,ci95,baseline_attack_rate,delta,delta_ci95,r_eff,"
         "baseline_r_eff,blocked,averted,identical_to_baseline\n";
  for (const auto& r : result.rows) {
    const auto& b = r.scenario.behavior;
    out << r.scenario.label << ',' << b.p1 << ',' << b.p2 << ',' << b.p3 << ',' << r.scenario.adoption << ','
        << r.replicates << ',' << r.mean_attack_rate << ',' << r.ci95_attack_rate << ',' << result.baseline_attack_rate
        << ',' << r.mean_delta << ',' << r.ci95_delta << ',' << r.mean_r_eff << ',' << result.baseline_r_eff << ','
        << r.mean_blocked << ',' << r.mean_averted << ',' << r.identical_to_baseline << '\n';
  }
}

void write_attack_csv(std::ostream& out, const std::vector<AttackOutcome>& outcomes) {
  out << "scenario,targets_met,nearest_signal,signal_within_3,deduction\n";
  for (const auto& o : outcomes) {
    out << to_string(o.scenario) << ',' << (o.targets_met ? 1 : 0) << ','
        << (o.nearest_signal ? std::to_string(*o.nearest_signal) : std::string("none")) << ','
        << ((o.nearest_signal && *o.nearest_signal <= 3) ? 1 : 0) << ',' << to_string(o.deduction) << '\n';
  }
}

}  // namespace netdist::sim
