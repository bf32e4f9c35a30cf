#include "netdist/sim/world.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <string>

#include "netdist/entropy.hpp"

namespace netdist::sim {

using nlohmann::json;

namespace {

// Stream tags for keyed draws.
enum : std::uint64_t { kTagWorld = 0x57, kTagAdopt = 0xad, kTagAdoptHousehold, kTagAdoptCopy };

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) it->get_to(out);
}

Edge ordered(PersonId a, PersonId b) { return a < b ? Edge{a, b} : Edge{b, a}; }

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw InfeasibleConfig(std::string(what) + " must be in [0, 1]");
}

}  // namespace

std::vector<Edge> watts_strogatz(std::uint32_t n, int k, double beta, std::mt19937_64& rng) {
  if (k < 2 || k % 2 != 0 || static_cast<std::uint32_t>(k) >= n) {
    throw InfeasibleConfig("watts-strogatz needs an even k with 2 <= k < n (k=" + std::to_string(k) +
                           ", n=" + std::to_string(n) + ")");
  }
  check_probability(beta, "rewiring probability");
  std::vector<std::set<PersonId>> adj(n);
  auto link = [&](PersonId a, PersonId b) {
    adj[a].insert(b);
    adj[b].insert(a);
  };
  for (PersonId i = 0; i < n; ++i) {
    for (int j = 1; j <= k / 2; ++j) link(i, (i + static_cast<PersonId>(j)) % n);
  }
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<PersonId> pick(0, n - 1);
  // Rewire each lattice edge (i, i + j) at most once, ring distance by ring distance.
  for (int j = 1; j <= k / 2; ++j) {
    for (PersonId i = 0; i < n; ++i) {
      if (coin(rng) >= beta) continue;
      const PersonId old = (i + static_cast<PersonId>(j)) % n;
      if (!adj[i].contains(old) || adj[i].size() >= n - 1) continue;
      PersonId target;
      do {
        target = pick(rng);
      } while (target == i || adj[i].contains(target));
      adj[i].erase(old);
      adj[old].erase(i);
      link(i, target);
    }
  }
  std::vector<Edge> edges;
  for (PersonId a = 0; a < n; ++a) {
    for (PersonId b : adj[a]) {
      if (a < b) edges.emplace_back(a, b);
    }
  }
  return edges;
}

SimWorld generate_world(const PopulationConfig& config, std::uint64_t seed) {
  if (config.people <= 0) throw InfeasibleConfig("population must be positive");
  if (config.household_size_weights.empty() ||
      std::ranges::any_of(config.household_size_weights, [](double w) { return !(w >= 0.0); }) ||
      std::accumulate(config.household_size_weights.begin(), config.household_size_weights.end(), 0.0) <= 0.0) {
    throw InfeasibleConfig("household size weights must be non-negative with a positive sum");
  }
  check_probability(config.random_long_fraction, "random_long_fraction");

  SimWorld world;
  world.seed = seed;
  world.population = config;
  const auto n = static_cast<std::uint32_t>(config.people);
  world.household_of.resize(n);

  std::mt19937_64 rng(keyed_hash({seed, kTagWorld}));
  std::discrete_distribution<int> size_dist(config.household_size_weights.begin(),
                                            config.household_size_weights.end());
  PersonId next = 0;
  while (next < n) {
    const auto size = std::min<std::uint32_t>(static_cast<std::uint32_t>(size_dist(rng)) + 1, n - next);
    std::vector<PersonId> members(size);
    std::iota(members.begin(), members.end(), next);
    for (PersonId p : members) world.household_of[p] = static_cast<std::uint32_t>(world.households.size());
    world.households.push_back(std::move(members));
    next += size;
  }

  for (std::size_t layer = 0; layer < config.occupations.size(); ++layer) {
    const auto& spec = config.occupations[layer];
    check_probability(spec.coverage, "occupation coverage");
    if (spec.group_size < 2) throw InfeasibleConfig("occupation group_size must be at least 2");
    std::vector<PersonId> pool(n);
    std::iota(pool.begin(), pool.end(), 0);
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(static_cast<std::size_t>(spec.coverage * n + 0.5));
    if (pool.empty()) continue;
    // Near-equal groups: sizes differ by at most one.
    const std::size_t groups = std::max<std::size_t>(1, (pool.size() + spec.group_size / 2) / spec.group_size);
    const std::size_t base = pool.size() / groups;
    const std::size_t extra = pool.size() % groups;
    std::size_t offset = 0;
    for (std::size_t g = 0; g < groups; ++g) {
      const std::size_t size = base + (g < extra ? 1 : 0);
      OccupationNetwork net;
      net.layer = layer;
      net.members.assign(pool.begin() + static_cast<std::ptrdiff_t>(offset),
                         pool.begin() + static_cast<std::ptrdiff_t>(offset + size));
      offset += size;
      if (static_cast<std::size_t>(spec.k) >= net.members.size()) {
        throw InfeasibleConfig("occupation k=" + std::to_string(spec.k) + " is not below group size " +
                               std::to_string(net.members.size()));
      }
      for (auto [x, y] : watts_strogatz(static_cast<std::uint32_t>(size), spec.k, spec.beta, rng)) {
        net.edges.push_back(ordered(net.members[x], net.members[y]));
      }
      std::ranges::sort(net.edges);
      world.occupation_nets.push_back(std::move(net));
    }
  }
  return world;
}

std::vector<std::vector<PersonId>> structural_neighbors(const SimWorld& world) {
  std::vector<std::vector<PersonId>> out(world.size());
  for (const auto& hh : world.households) {
    for (PersonId a : hh) {
      for (PersonId b : hh) {
        if (a != b) out[a].push_back(b);
      }
    }
  }
  for (const auto& net : world.occupation_nets) {
    for (auto [a, b] : net.edges) {
      out[a].push_back(b);
      out[b].push_back(a);
    }
  }
  for (auto& v : out) {
    std::ranges::sort(v);
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return out;
}

double clustering_coefficient(std::uint32_t n, const std::vector<Edge>& edges) {
  std::vector<std::vector<PersonId>> adj(n);
  for (auto [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (auto& v : adj) std::ranges::sort(v);
  double sum = 0.0;
  for (PersonId v = 0; v < n; ++v) {
    const auto& nb = adj[v];
    if (nb.size() < 2) continue;
    std::size_t links = 0;
    for (std::size_t i = 0; i < nb.size(); ++i) {
      for (std::size_t j = i + 1; j < nb.size(); ++j) {
        if (std::ranges::binary_search(adj[nb[i]], nb[j])) ++links;
      }
    }
    sum += 2.0 * static_cast<double>(links) / static_cast<double>(nb.size() * (nb.size() - 1));
  }
  return n == 0 ? 0.0 : sum / n;
}

std::vector<double> adoption_draws(const SimWorld& world, const AdoptionParams& params, std::uint64_t seed) {
  check_probability(params.household_correlation, "household_correlation");
  std::vector<double> draws(world.size());
  for (PersonId p = 0; p < world.size(); ++p) {
    const bool copy = keyed_uniform({seed, kTagAdoptCopy, p}) < params.household_correlation;
    draws[p] = copy ? keyed_uniform({seed, kTagAdoptHousehold, world.household_of[p]})
                    : keyed_uniform({seed, kTagAdopt, p});
  }
  return draws;
}

void from_json(const json& j, OccupationLayer& c) {
  read(j, "coverage", c.coverage);
  read(j, "group_size", c.group_size);
  read(j, "k", c.k);
  read(j, "beta", c.beta);
}
void to_json(json& j, const OccupationLayer& c) {
  j = json{{"coverage", c.coverage}, {"group_size", c.group_size}, {"k", c.k}, {"beta", c.beta}};
}

void from_json(const json& j, PopulationConfig& c) {
  read(j, "people", c.people);
  read(j, "household_size_weights", c.household_size_weights);
  read(j, "occupations", c.occupations);
  read(j, "random_long_fraction", c.random_long_fraction);
}
void to_json(json& j, const PopulationConfig& c) {
  j = json{{"people", c.people},
           {"household_size_weights", c.household_size_weights},
           {"occupations", c.occupations},
           {"random_long_fraction", c.random_long_fraction}};
}

void from_json(const json& j, EpiParams& c) {
  read(j, "transmission_prob", c.transmission_prob);
  read(j, "latent_days", c.latent_days);
  read(j, "infectious_days", c.infectious_days);
  read(j, "initial_seeds", c.initial_seeds);
  read(j, "random_contacts_per_day", c.random_contacts_per_day);
}
void to_json(json& j, const EpiParams& c) {
  j = json{{"transmission_prob", c.transmission_prob},
           {"latent_days", c.latent_days},
           {"infectious_days", c.infectious_days},
           {"initial_seeds", c.initial_seeds},
           {"random_contacts_per_day", c.random_contacts_per_day}};
}

void from_json(const json& j, BehaviorModel& c) {
  read(j, "p1", c.p1);
  read(j, "p2", c.p2);
  read(j, "p3", c.p3);
  read(j, "alert_distance", c.alert_distance);
  read(j, "precaution_days", c.precaution_days);
}
void to_json(json& j, const BehaviorModel& c) {
  j = json{{"p1", c.p1},
           {"p2", c.p2},
           {"p3", c.p3},
           {"alert_distance", c.alert_distance},
           {"precaution_days", c.precaution_days}};
}

void from_json(const json& j, ReportingParams& c) {
  read(j, "positive_report_prob", c.positive_report_prob);
  read(j, "contact_token_prob", c.contact_token_prob);
  read(j, "contact_redeem_prob", c.contact_redeem_prob);
}
void to_json(json& j, const ReportingParams& c) {
  j = json{{"positive_report_prob", c.positive_report_prob},
           {"contact_token_prob", c.contact_token_prob},
           {"contact_redeem_prob", c.contact_redeem_prob}};
}

void from_json(const json& j, AdoptionParams& c) {
  read(j, "rate", c.rate);
  read(j, "household_correlation", c.household_correlation);
}
void to_json(json& j, const AdoptionParams& c) {
  j = json{{"rate", c.rate}, {"household_correlation", c.household_correlation}};
}

}  // namespace netdist::sim
