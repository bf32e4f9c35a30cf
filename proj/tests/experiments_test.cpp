#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "netdist/sim/experiments.hpp"
#include "oracles.hpp"

using namespace netdist;
using namespace netdist::sim;

namespace {

std::vector<Edge> as_edges(const std::vector<std::pair<std::uint32_t, std::uint32_t>>& e) {
  return {e.begin(), e.end()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

PopulationConfig town(int people) {
  PopulationConfig c;
  c.people = people;
  return c;
}

}  // namespace

TEST(ClusterFraction, EdgesOfTheAdoptionRange) {
  std::mt19937_64 rng(1);
  const auto g = netdist::test::gnp(200, 0.05, rng);
  const auto edges = as_edges(g.edges);
  EXPECT_EQ(largest_cluster_fraction(200, edges, std::vector<bool>(200, false)), 0.0);
  std::vector<Edge> path;
  for (PersonId i = 0; i + 1 < 50; ++i) path.emplace_back(i, i + 1);
  EXPECT_EQ(largest_cluster_fraction(50, path, std::vector<bool>(50, true)), 1.0);
  std::vector<bool> every_other(50, false);
  for (int i = 0; i < 50; i += 2) every_other[i] = true;
  EXPECT_DOUBLE_EQ(largest_cluster_fraction(50, path, every_other), 1.0 / 25);
  std::vector<bool> first_half(50, false);
  for (int i = 0; i < 20; ++i) first_half[i] = true;
  first_half[40] = true;
  EXPECT_DOUBLE_EQ(largest_cluster_fraction(50, path, first_half), 20.0 / 21);
}

TEST(CriticalMass, ZeroAndFullAdoption) {
  CriticalMassConfig config;
  config.adoption_rates = {0.0, 0.5, 1.0};
  config.replicates = 3;
  config.viewers = 20;
  const auto r = exp_critical_mass(campus_population(), campus_epi(), config, 2);
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_EQ(r.rows[0].mean_cluster_fraction, 0.0);
  EXPECT_EQ(r.rows[0].mean_connections, 0.0);
  EXPECT_NEAR(r.rows[2].mean_cluster_fraction, 1.0, 1e-9);
  EXPECT_GT(r.rows[1].mean_cluster_fraction, r.rows[0].mean_cluster_fraction);
  EXPECT_GT(r.mean_degree, 0.0);
  EXPECT_GT(r.median_degree, 0.0);
  ASSERT_TRUE(r.knee);
  EXPECT_LE(*r.knee, 0.5);
}

TEST(ContactUnion, GrowsWithTheWindow) {
  const auto w = generate_world(town(300), 3);
  const auto one = contact_union(w, EpiParams{}, 4, 1);
  const auto two = contact_union(w, EpiParams{}, 4, 14);
  EXPECT_TRUE(std::is_sorted(one.begin(), one.end()));
  EXPECT_TRUE(std::includes(two.begin(), two.end(), one.begin(), one.end()));
  EXPECT_GT(two.size(), one.size());
}

TEST(Distortion, FullAdoptionHasNone) {
  const auto w = generate_world(town(500), 5);
  DistortionConfig config;
  config.adoption_rates = {1.0};
  config.pairs = 2000;
  config.sources = 20;
  const auto rows = exp_distance_distortion(w, EpiParams{}, config, 6);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].violations, 0);
  EXPECT_EQ(rows[0].reported_beyond, 0);
  EXPECT_EQ(rows[0].mean_excess, 0.0);
  EXPECT_EQ(rows[0].max_excess, 0);
  EXPECT_EQ(rows[0].excess_histogram.at(0), rows[0].finite_pairs);
}

TEST(Distortion, RemovingTheCutVertex) {
  // Two triangles joined through person 3, who does not use the app.
  const std::vector<Edge> edges{{0, 1}, {0, 2}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {4, 6}, {5, 6}};
  std::vector<bool> adopters(7, true);
  adopters[3] = false;
  const auto pairs = sample_distance_pairs(7, edges, adopters, 200, 6, 7);
  ASSERT_FALSE(pairs.empty());
  bool crossed = false;
  for (const auto& p : pairs) {
    ASSERT_TRUE(adopters[p.a] && adopters[p.b] && p.a != p.b);
    ASSERT_FALSE(p.true_distance.is_beyond());
    const bool same_side = (p.a < 3) == (p.b < 3);
    if (same_side) {
      ASSERT_EQ(p.reported, p.true_distance);
    } else {
      crossed = true;
      ASSERT_TRUE(p.reported.is_beyond());
    }
  }
  EXPECT_TRUE(crossed);
}

TEST(Distortion, PairsMatchFloydWarshallOnBothGraphs) {
  auto c = town(150);
  const auto w = generate_world(c, 8);
  const auto edges = contact_union(w, EpiParams{}, 9, 14);
  const auto n = static_cast<std::uint32_t>(w.size());
  const auto draws = adoption_draws(w, AdoptionParams{}, 10);
  std::vector<bool> adopters(n);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> all(edges.begin(), edges.end());
  std::vector<std::pair<std::uint32_t, std::uint32_t>> induced;
  for (PersonId p = 0; p < n; ++p) adopters[p] = draws[p] < 0.5;
  for (auto [a, b] : edges) {
    if (adopters[a] && adopters[b]) induced.emplace_back(a, b);
  }
  const auto full = netdist::test::floyd_warshall(n, all);
  const auto sub = netdist::test::floyd_warshall(n, induced);
  auto expected = [](int d) {
    return d == netdist::test::kUnreachable || d > 12 ? NetworkDistance::beyond() : NetworkDistance::hops(d);
  };
  const auto pairs = sample_distance_pairs(n, edges, adopters, 3000, 30, 11);
  EXPECT_EQ(pairs.size(), 3000u);
  std::map<int, int> excess;
  for (const auto& p : pairs) {
    ASSERT_EQ(p.true_distance, expected(full[p.a][p.b]));
    ASSERT_EQ(p.reported, expected(sub[p.a][p.b]));
    ASSERT_GE(p.reported, p.true_distance);
    if (!p.reported.is_beyond()) ++excess[p.reported.value() - p.true_distance.value()];
  }
  EXPECT_GT(excess.size(), 1u);
}

TEST(Intervention, WordOfMouthNeverHurts) {
  SimParams base;
  base.epi.transmission_prob = 0.05;
  InterventionConfig config;
  config.replicates = 8;
  config.max_days = 200;
  BehaviorModel quiet{0.6, 0.6, 0.0, 3, 14};
  BehaviorModel chatty = quiet;
  chatty.p3 = 1.0;
  config.scenarios = {{"p3=0", quiet, 0.3}, {"p3=1", chatty, 0.3}};
  const auto r = exp_intervention_impact(town(400), base, config, 12);
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_LE(r.rows[1].mean_attack_rate, r.rows[0].mean_attack_rate);
  EXPECT_LE(r.rows[0].mean_attack_rate, r.baseline_attack_rate);
}

TEST(Intervention, NoBehaviourEqualsBaselineExactly) {
  SimParams base;
  InterventionConfig config;
  config.replicates = 4;
  config.max_days = 150;
  config.scenarios = p1_sweep(0.9, 0.5, {0.0});
  const auto r = exp_intervention_impact(town(300), base, config, 13);
  EXPECT_EQ(r.rows[0].identical_to_baseline, 4);
  EXPECT_EQ(r.rows[0].mean_delta, 0.0);
  EXPECT_EQ(r.rows[0].mean_attack_rate, r.baseline_attack_rate);
  EXPECT_EQ(r.rows[0].mean_blocked, 0.0);
}

TEST(Attack, ThreeScenarios) {
  const auto outcomes = exp_copresence_attack(3);
  ASSERT_EQ(outcomes.size(), 3u);
  EXPECT_EQ(outcomes[0].deduction, Deduction::kTrueNegative);
  EXPECT_EQ(outcomes[1].deduction, Deduction::kTruePositive);
  EXPECT_EQ(outcomes[1].nearest_signal, 3);
  EXPECT_EQ(outcomes[2].deduction, Deduction::kFalsePositive);
  EXPECT_FALSE(outcomes[2].targets_met);
  std::ostringstream out;
  write_attack_csv(out, outcomes);
  const auto rows = lines(out.str());
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], "scenario,targets_met,nearest_signal,signal_within_3,deduction");
}

TEST(Scenario, ReadsPresetAndExperiments) {
  const auto j = nlohmann::json::parse(R"({
    "seed": 42,
    "preset": "campus",
    "behavior": {"p1": 0.3},
    "experiments": {
      "critical_mass": {"replicates": 2, "adoption_rates": [0.1, 0.2]},
      "intervention": {"replicates": 3, "p1": [0, 1]},
      "copresence_attack": true
    }
  })");
  const auto c = scenario_from_json(j);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.population.people, campus_population().people);
  EXPECT_DOUBLE_EQ(c.params.behavior.p1, 0.3);
  ASSERT_TRUE(c.critical_mass);
  EXPECT_EQ(c.critical_mass->replicates, 2);
  EXPECT_EQ(c.critical_mass->adoption_rates, (std::vector<double>{0.1, 0.2}));
  EXPECT_FALSE(c.distortion);
  ASSERT_TRUE(c.intervention);
  EXPECT_EQ(c.intervention->scenarios.size(), 2u);
  EXPECT_TRUE(c.copresence_attack);

  EXPECT_THROW(scenario_from_json(nlohmann::json::parse(R"({"preset": "moon"})")), InfeasibleConfig);
  EXPECT_THROW(scenario_from_json(nlohmann::json::parse(R"({"behavior": {"p2": 2}})")), InfeasibleConfig);
}

TEST(Csv, HeadersAndRowCounts) {
  CriticalMassResult cm;
  cm.rows = {{0.1, 0.2, 0.01, 3.0}, {0.2, 0.5, 0.02, 9.0}};
  std::ostringstream a;
  write_critical_mass_csv(a, cm);
  EXPECT_EQ(lines(a.str()).size(), 3u);
  EXPECT_EQ(lines(a.str())[0], "adoption,cluster_fraction,ci95,connections_in_chart,mean_degree,median_degree");

  std::vector<DistortionRow> rows(2);
  std::ostringstream b;
  write_distortion_csv(b, rows);
  EXPECT_EQ(lines(b.str()).size(), 3u);
  EXPECT_EQ(lines(b.str())[0].rfind("adoption,pairs,finite_pairs", 0), 0u);

  InterventionResult ir;
  ir.rows.resize(3);
  std::ostringstream c;
  write_intervention_csv(c, ir);
  EXPECT_EQ(lines(c.str()).size(), 4u);
  EXPECT_EQ(lines(c.str())[0].rfind("label,p1,p2,p3", 0), 0u);
}
