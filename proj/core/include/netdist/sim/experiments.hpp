#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "netdist/sim/simulation.hpp"
#include "netdist/sim/world.hpp"

namespace netdist::sim {

/// Union of long (qualifying) contacts over days [0, days), `first < second`,
/// sorted and unique.
std::vector<Edge> contact_union(const SimWorld& world, const EpiParams& epi, std::uint64_t seed, int days);

/// Dense campus: small dorm rooms, 60-person cohorts wired as small worlds,
/// sparse random encounters. Mean 14-day degree is close to 30.
PopulationConfig campus_population();
EpiParams campus_epi();

/// Seeds for replicate `r` of an experiment family.
std::uint64_t world_seed(std::uint64_t seed, int replicate);
std::uint64_t run_seed(std::uint64_t seed, int replicate);

// --- critical mass ----------------------------------------------------------

struct CriticalMassConfig {
  std::vector<double> adoption_rates{0.0, 0.025, 0.05, 0.075, 0.1, 0.125, 0.15, 0.2, 0.3, 0.5, 1.0};
  int replicates = 30;
  /// Adopters sampled per replicate for the connections-in-chart column.
  int viewers = 200;
  int window_days = 14;
  double household_correlation = 0.0;
};

struct CriticalMassRow {
  double adoption = 0.0;
  double mean_cluster_fraction = 0.0;
  double ci95_cluster_fraction = 0.0;
  /// Adopters within 12 hops of a sampled adopter, averaged.
  double mean_connections = 0.0;
};

struct CriticalMassResult {
  std::vector<CriticalMassRow> rows;
  double mean_degree = 0.0;
  double median_degree = 0.0;
  /// Lowest swept adoption rate whose mean cluster fraction reaches 0.5.
  std::optional<double> knee;
};

/// Largest connected component among `members` (induced subgraph) divided by
/// the member count; 0 for no members.
double largest_cluster_fraction(std::size_t n, const std::vector<Edge>& edges, const std::vector<bool>& members);

CriticalMassResult exp_critical_mass(const PopulationConfig& population, const EpiParams& epi,
                                     const CriticalMassConfig& config, std::uint64_t seed);

// --- distance distortion ----------------------------------------------------

struct DistortionConfig {
  std::vector<double> adoption_rates{0.25, 0.5, 0.75};
  int pairs = 10000;
  /// Pairs are drawn as `pairs / sources` targets for each sampled source.
  int sources = 100;
  int window_days = 14;
};

struct DistortionRow {
  double adoption = 0.0;
  int pairs = 0;
  /// Both distances finite.
  int finite_pairs = 0;
  /// Reported BEYOND while true distance is finite.
  int reported_beyond = 0;
  int true_beyond = 0;
  /// Finite pairs with reported < true. Must be zero.
  int violations = 0;
  double beyond_fraction = 0.0;
  double mean_excess = 0.0;
  /// Quantiles of reported - true over finite pairs.
  int q10 = 0, q50 = 0, q90 = 0, max_excess = 0;
  /// excess_histogram[k] = finite pairs with reported - true == k.
  std::vector<int> excess_histogram;
};

struct DistancePair {
  PersonId a = 0;
  PersonId b = 0;
  NetworkDistance true_distance = NetworkDistance::beyond();
  NetworkDistance reported = NetworkDistance::beyond();
};

/// True distances on the whole-population graph, reported distances on the
/// graph induced by `adopters`. Pairs are distinct adopters.
std::vector<DistancePair> sample_distance_pairs(std::size_t n, const std::vector<Edge>& edges,
                                                const std::vector<bool>& adopters, int pairs, int sources,
                                                std::uint64_t seed);

std::vector<DistortionRow> exp_distance_distortion(const SimWorld& world, const EpiParams& epi,
                                                   const DistortionConfig& config, std::uint64_t seed);

// --- intervention impact ----------------------------------------------------

struct InterventionScenario {
  std::string label;
  BehaviorModel behavior;
  double adoption = 0.4;
};

struct InterventionConfig {
  std::vector<InterventionScenario> scenarios;
  int replicates = 30;
  int max_days = 365;
};

struct InterventionRow {
  InterventionScenario scenario;
  int replicates = 0;
  double mean_attack_rate = 0.0;
  double ci95_attack_rate = 0.0;
  /// Paired difference against the no-behaviour baseline.
  double mean_delta = 0.0;
  double ci95_delta = 0.0;
  double mean_r_eff = 0.0;
  double mean_blocked = 0.0;
  double mean_averted = 0.0;
  /// Replicates whose compartment trajectory equals the baseline's exactly.
  int identical_to_baseline = 0;
};

struct InterventionResult {
  double baseline_attack_rate = 0.0;
  double baseline_r_eff = 0.0;
  std::vector<InterventionRow> rows;
  /// attack_rates[scenario][replicate]
  std::vector<std::vector<double>> attack_rates;
};

/// Compartment counts and per-person state digests match day by day.
bool same_trajectory(const std::vector<DayCounts>& a, const std::vector<DayCounts>& b);

/// The p1 sweep at fixed p2 used for directionality checks.
std::vector<InterventionScenario> p1_sweep(double p2, double adoption, std::vector<double> p1_values);

/// Runs every scenario on the same worlds and seeds as a behaviour-free
/// baseline. Replicates run in parallel.
InterventionResult exp_intervention_impact(const PopulationConfig& population, const SimParams& base,
                                           const InterventionConfig& config, std::uint64_t seed);

// --- co-presence inference attack -------------------------------------------

enum class AttackScenario { kNeverMet, kMet, kConfounder };
/// What an observer concludes from the presence or absence of a signal at
/// distance <= 3, judged against the ground truth.
enum class Deduction { kTrueNegative, kTruePositive, kFalsePositive, kFalseNegative };

std::string_view to_string(AttackScenario scenario);
std::string_view to_string(Deduction deduction);

struct AttackOutcome {
  AttackScenario scenario = AttackScenario::kNeverMet;
  bool targets_met = false;
  /// Nearest distance at which B' sees a signal, if any.
  std::optional<int> nearest_signal;
  Deduction deduction = Deduction::kTrueNegative;
};

/// Scripts targets A and B, attackers A' and B' and, in the confounder case, a
/// bystander C through a fresh in-memory server.
AttackOutcome run_copresence_attack(AttackScenario scenario, std::uint64_t seed);
std::vector<AttackOutcome> exp_copresence_attack(std::uint64_t seed);

// --- scenario files -----------------------------------------------------------

struct ScenarioConfig {
  std::uint64_t seed = 1;
  PopulationConfig population;
  SimParams params;
  int max_days = 365;
  std::optional<CriticalMassConfig> critical_mass;
  std::optional<DistortionConfig> distortion;
  std::optional<InterventionConfig> intervention;
  bool copresence_attack = false;
};

/// Throws InfeasibleConfig or nlohmann::json::exception.
ScenarioConfig scenario_from_json(const nlohmann::json& j);

void write_critical_mass_csv(std::ostream& out, const CriticalMassResult& result);
void write_distortion_csv(std::ostream& out, const std::vector<DistortionRow>& rows);
void write_intervention_csv(std::ostream& out, const InterventionResult& result);
void write_attack_csv(std::ostream& out, const std::vector<AttackOutcome>& outcomes);

}  // namespace netdist::sim
