#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace netdist::sim {

using PersonId = std::uint32_t;
using Edge = std::pair<PersonId, PersonId>;

/// One layer of occupation networks: a `coverage` fraction of the population
/// is split into groups of about `group_size`, each wired as a
/// Watts-Strogatz graph with `k` ring neighbours and rewiring probability
/// `beta`.
struct OccupationLayer {
  double coverage = 1.0;
  int group_size = 20;
  int k = 6;
  double beta = 0.1;
};

struct PopulationConfig {
  int people = 1000;
  /// Weight of household size i + 1.
  std::vector<double> household_size_weights{0.3, 0.35, 0.15, 0.15, 0.05};
  std::vector<OccupationLayer> occupations{OccupationLayer{}};
  /// Fraction of random daily contacts lasting at least 15 minutes.
  double random_long_fraction = 0.5;
};

struct EpiParams {
  double transmission_prob = 0.05;
  int latent_days = 3;
  int infectious_days = 6;
  int initial_seeds = 5;
  /// Expected random contacts per person per day.
  double random_contacts_per_day = 2.0;
};

struct BehaviorModel {
  /// Probability an alerted person adopts precautions.
  double p1 = 0.0;
  /// Probability an active precaution blocks a would-be transmission.
  double p2 = 0.0;
  /// Probability an alerted person tells each household or occupation neighbour.
  double p3 = 0.0;
  int alert_distance = 3;
  int precaution_days = 14;
};

struct ReportingParams {
  /// Probability an infected adopter enters a POSITIVE token on symptom day.
  double positive_report_prob = 0.5;
  /// Probability the authority hands each household member a CONTACT token.
  double contact_token_prob = 0.5;
  /// Probability an adopter who received a CONTACT token enters it.
  double contact_redeem_prob = 0.2;
};

struct AdoptionParams {
  double rate = 0.4;
  /// Probability a person copies their household's adoption draw instead of
  /// drawing alone. Keeps the marginal rate; adds positive correlation.
  double household_correlation = 0.0;
};

/// Thrown by generate_world for parameters no population can satisfy.
class InfeasibleConfig : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OccupationNetwork {
  std::size_t layer = 0;
  std::vector<PersonId> members;
  /// Global person ids, `first < second`.
  std::vector<Edge> edges;
};

/// Static structure of a synthetic population.
struct SimWorld {
  std::uint64_t seed = 0;
  PopulationConfig population;
  std::vector<std::uint32_t> household_of;
  std::vector<std::vector<PersonId>> households;
  std::vector<OccupationNetwork> occupation_nets;

  std::size_t size() const { return household_of.size(); }
};

/// Ring lattice over `n` nodes with `k` neighbours, each lattice edge rewired
/// to a uniform non-duplicate target with probability `beta`. Edge count is
/// preserved. Throws InfeasibleConfig unless k is even and 0 < k < n.
std::vector<Edge> watts_strogatz(std::uint32_t n, int k, double beta, std::mt19937_64& rng);

/// Deterministic for a fixed seed. Throws InfeasibleConfig.
SimWorld generate_world(const PopulationConfig& config, std::uint64_t seed);

/// Household plus occupation neighbours of every person, sorted and unique.
std::vector<std::vector<PersonId>> structural_neighbors(const SimWorld& world);

/// Average local clustering coefficient of an undirected simple graph.
double clustering_coefficient(std::uint32_t n, const std::vector<Edge>& edges);

/// Per-person adoption draws; person i adopts at rate r iff draws[i] < r, so
/// adopter sets are nested across rates.
std::vector<double> adoption_draws(const SimWorld& world, const AdoptionParams& params, std::uint64_t seed);

void from_json(const nlohmann::json& j, OccupationLayer& c);
void to_json(nlohmann::json& j, const OccupationLayer& c);
void from_json(const nlohmann::json& j, PopulationConfig& c);
void to_json(nlohmann::json& j, const PopulationConfig& c);
void from_json(const nlohmann::json& j, EpiParams& c);
void to_json(nlohmann::json& j, const EpiParams& c);
void from_json(const nlohmann::json& j, BehaviorModel& c);
void to_json(nlohmann::json& j, const BehaviorModel& c);
void from_json(const nlohmann::json& j, ReportingParams& c);
void to_json(nlohmann::json& j, const ReportingParams& c);
void from_json(const nlohmann::json& j, AdoptionParams& c);
void to_json(nlohmann::json& j, const AdoptionParams& c);

}  // namespace netdist::sim
