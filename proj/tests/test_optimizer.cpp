#include <gtest/gtest.h>

#include <random>

#include "dplace/optimizer.hpp"
#include "support.hpp"

namespace dplace {
namespace {

using testing::ScenarioBuilder;

// Two private, two shared and four unshared initial datasets plus one
// generated dataset.
Scenario eight_dataset_fixture() {
  ScenarioBuilder b;
  b.cloud();
  b.edge(5000);
  b.edge(8000);
  b.band(0, 1, 10);
  b.band(0, 2, 20);
  b.band(1, 2, 150);
  std::vector<DatasetId> d;
  d.push_back(b.dataset(1500));
  d.push_back(b.dataset(3000, DcId{1}));
  d.push_back(b.dataset(1000));
  d.push_back(b.dataset(3500));
  d.push_back(b.dataset(4000));
  d.push_back(b.dataset(2500, DcId{2}));
  d.push_back(b.dataset(500));
  d.push_back(b.dataset(2300));
  const DatasetId out = b.dataset(900);
  const WorkflowId w0 = b.workflow();
  const WorkflowId w1 = b.workflow();
  b.task(w0, {d[0], d[1], d[2]}, {out});
  b.task(w0, {d[3], out});
  b.task(w1, {d[2], d[4], d[5]});
  b.task(w1, {d[3], d[6]});
  b.task(w0, {d[7]});
  return b.finish();
}

TEST(Encoding, SharedFirstThenUnsharedByIdWithoutPrivatesOrGenerated) {
  const Scenario s = eight_dataset_fixture();
  const Encoding e = Encoding::build_time(s);
  // Datasets 2 and 3 are read by both workflows.
  EXPECT_EQ(std::vector<DatasetId>(e.datasets().begin(), e.datasets().end()),
            (std::vector<DatasetId>{2, 3, 0, 4, 6, 7}));
}

TEST(Decode, MatchesIndexByIndexDecoder) {
  const Scenario s = eight_dataset_fixture();
  const Encoding e = Encoding::build_time(s);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<DcId> any(0, 2);
  for (int trial = 0; trial < 50; ++trial) {
    Particle p;
    for (std::size_t k = 0; k < e.dimension(); ++k) p.positions.push_back(any(rng));
    const PlacementMap got = decode(p, s);
    PlacementMap want(s.datasets.size());
    want.place(1, 1);
    want.place(5, 2);
    const DatasetId order[] = {2, 3, 0, 4, 6, 7};
    for (std::size_t k = 0; k < 6; ++k) want.place(order[k], p.positions[k]);
    EXPECT_EQ(got, want);
  }
  Particle bad{{0, 1}};
  EXPECT_THROW(decode(bad, s), std::invalid_argument);
  Particle out_of_range{{0, 1, 2, 3, 0, 0}};
  EXPECT_THROW(decode(out_of_range, s), std::invalid_argument);
}

TEST(Repair, EvictsLargestPublicToRegionCloud) {
  ScenarioBuilder b;
  b.cloud();
  b.edge(1000);
  b.band(0, 1, 20);
  b.dataset(400);
  b.dataset(600);
  b.dataset(600);
  b.dataset(300, DcId{1});
  const Scenario s = b.finish();
  PlacementMap p(4);
  for (DatasetId d = 0; d < 4; ++d) p.place(d, 1);
  const PlacementMap r = repair(p, s);
  // 1900 MB on a 1000 MB edge: both 600 MB datasets go, lowest id first.
  EXPECT_EQ(r.at(1), 0);
  EXPECT_EQ(r.at(2), 0);
  EXPECT_EQ(r.at(0), 1);
  EXPECT_EQ(r.at(3), 1);
  EXPECT_TRUE(capacity_feasible(s, r));

  std::vector<Relocation> moves;
  const DatasetId first[] = {0};
  const PlacementMap r2 = repair_pending(p, s, first, &moves);
  ASSERT_EQ(moves.size(), 2u);
  EXPECT_EQ(moves[0].dataset, 0);
  EXPECT_EQ(r2.at(0), 0);
  EXPECT_EQ(r2.at(3), 1);
}

TEST(Repair, PrivateOverflowIsInfeasible) {
  ScenarioBuilder b;
  b.cloud();
  b.edge(100);
  b.band(0, 1, 20);
  b.dataset(300, DcId{1});
  const Scenario s = b.finish();
  PlacementMap p(1);
  p.place(0, 1);
  EXPECT_THROW(repair(p, s), InfeasibleError);
}

TEST(BuildObjective, EqualsOracleOfRepairedPlacement) {
  std::mt19937_64 rng(21);
  int repaired = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const Scenario s = testing::random_small_scenario(rng, 3, 8, 5000);
    if (!validate_scenario(s).empty()) continue;
    BuildObjective objective(s);
    std::uniform_int_distribution<DcId> any(0, s.num_datacenters() - 1);
    for (int k = 0; k < 5; ++k) {
      Particle p;
      for (std::size_t i = 0; i < objective.dimension(); ++i) p.positions.push_back(any(rng));
      const PlacementMap raw = decode(p, s);
      const PlacementMap fixed = repair(raw, s);
      repaired += !(raw == fixed);
      const testing::OracleStage want = testing::oracle_stage_time(s, fixed, Stage::kBuild);
      EXPECT_EQ(fitness(p, s), want.pri + want.shared + want.unshared);
      EXPECT_EQ(objective.placement(p.positions), fixed);
    }
  }
  EXPECT_GT(repaired, 0);
}

TEST(CachedObjective, SameCostsAndCountsHits) {
  const Scenario s = eight_dataset_fixture();
  BuildObjective inner(s);
  CachedObjective cached(inner);
  const std::vector<DcId> a{0, 1, 2, 0, 1, 2};
  const std::vector<DcId> b{2, 2, 2, 2, 2, 2};
  EXPECT_EQ(cached.cost(a), inner.cost(a));
  EXPECT_EQ(cached.cost(b), inner.cost(b));
  EXPECT_EQ(cached.cost(a), inner.cost(a));
  EXPECT_EQ(cached.evaluations(), 3u);
  EXPECT_EQ(cached.hits(), 1u);
}

TEST(Operators, MutationTakesDonorOnlyWhereDonorsDiffer) {
  Rng rng(4);
  const Particle x{{0, 0, 0, 0, 0, 0}};
  const Particle a{{1, 1, 1, 2, 2, 2}};
  const Particle b{{1, 0, 0, 2, 0, 0}};
  EXPECT_EQ(mutate(x, a, b, 0.0, rng), x);
  EXPECT_EQ(mutate(x, a, b, 1.0, rng), (Particle{{0, 1, 1, 0, 2, 2}}));
  for (int t = 0; t < 200; ++t) {
    const Particle m = mutate(x, a, b, 0.5, rng);
    for (std::size_t k = 0; k < 6; ++k) {
      if (a.positions[k] == b.positions[k])
        EXPECT_EQ(m.positions[k], x.positions[k]);
      else
        EXPECT_TRUE(m.positions[k] == x.positions[k] || m.positions[k] == a.positions[k]);
    }
  }
  EXPECT_THROW(mutate(x, Particle{{1}}, b, 0.5, rng), std::invalid_argument);
}

TEST(Operators, CrossoverExtremesAndMixing) {
  Rng rng(5);
  const Particle p1{{1, 1, 1, 1}};
  const Particle p2{{2, 2, 2, 2}};
  EXPECT_EQ(crossover(p1, p2, 1.0, rng), p1);
  EXPECT_EQ(crossover(p1, p2, 0.0, rng), p2);
  int from_first = 0;
  for (int t = 0; t < 1000; ++t)
    for (DcId v : crossover(p1, p2, 0.1, rng).positions) from_first += v == 1;
  EXPECT_NEAR(from_first / 4000.0, 0.1, 0.02);
}

TEST(Operators, SelectionAgainstGbest) {
  const Scenario s = eight_dataset_fixture();
  const Particle good{{1, 1, 1, 1, 1, 1}};
  const Particle prev{{0, 0, 0, 0, 0, 0}};
  const Seconds f = fitness(good, s);
  EXPECT_EQ(select_next(good, prev, f + Seconds(1), s), good);
  EXPECT_EQ(select_next(good, prev, f, s), prev);
}

TEST(Config, RejectsOutOfRange) {
  OptimizerConfig c;
  EXPECT_NO_THROW(check_config(c));
  c.n = 0;
  EXPECT_THROW(check_config(c), std::invalid_argument);
  c = {};
  c.F = 1.5;
  EXPECT_THROW(check_config(c), std::invalid_argument);
  c = {};
  c.cr_g = -0.1;
  EXPECT_THROW(check_config(c), std::invalid_argument);
  EXPECT_EQ(parse_metaheuristic("ga_dpso"), Metaheuristic::kGaDpso);
  EXPECT_THROW(parse_metaheuristic("pso"), std::invalid_argument);
}

TEST(Search, HistoryNeverIncreasesAndSeedsReproduce) {
  const Scenario s = testing::enumerable_fixture(9);
  OptimizerConfig cfg;
  cfg.n = 30;
  cfg.itermax = 200;
  cfg.seed = 77;
  for (Metaheuristic m : {Metaheuristic::kDeDpso, Metaheuristic::kDe, Metaheuristic::kDpso, Metaheuristic::kGaDpso}) {
    BuildObjective obj(s);
    const SearchResult r = search(obj, m, cfg);
    ASSERT_EQ(r.history.size(), 201u);
    for (std::size_t i = 1; i < r.history.size(); ++i) EXPECT_LE(r.history[i], r.history[i - 1]);
    EXPECT_EQ(r.history.back(), r.cost);
    EXPECT_EQ(obj.cost(r.best.positions), r.cost);
    BuildObjective again(s);
    EXPECT_EQ(search(again, m, cfg).best, r.best);
  }
  BuildObjective obj(s);
  EXPECT_EQ(search(obj, Metaheuristic::kRandom, cfg).history.size(), 1u);
}

TEST(Search, DeDpsoFindsEnumerationOptimum) {
  for (std::uint64_t f = 0; f < 3; ++f) {
    const Scenario s = testing::enumerable_fixture(f);
    ASSERT_TRUE(validate_scenario(s).empty());
    const testing::Enumerated best = testing::enumerate_build_optimum(s);
    EXPECT_EQ(best.placements, 729u);
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      OptimizerConfig cfg;
      cfg.seed = seed;
      EXPECT_EQ(run_de_dpso(s, cfg).time, best.best) << "fixture " << f << " seed " << seed;
    }
  }
}

TEST(Search, RandomIsNoBetterThanAnyMetaheuristicOnAverage) {
  const Scenario s = testing::enumerable_fixture(4);
  double random = 0;
  double others[4] = {0, 0, 0, 0};
  const Metaheuristic kinds[] = {Metaheuristic::kDeDpso, Metaheuristic::kDe, Metaheuristic::kDpso,
                                 Metaheuristic::kGaDpso};
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    OptimizerConfig cfg;
    cfg.n = 20;
    cfg.itermax = 50;
    cfg.seed = seed;
    random += run_baseline(Metaheuristic::kRandom, s, cfg).time.to_double();
    for (int k = 0; k < 4; ++k) others[k] += run_baseline(kinds[k], s, cfg).time.to_double();
  }
  for (double o : others) EXPECT_GE(random, o);
}

TEST(Seeds, MixSeedSeparatesSalts) {
  EXPECT_NE(mix_seed(1, 0), mix_seed(1, 1));
  EXPECT_NE(mix_seed(1, 0), mix_seed(2, 0));
  EXPECT_EQ(mix_seed(5, 3), mix_seed(5, 3));
}

}  // namespace
}  // namespace dplace
