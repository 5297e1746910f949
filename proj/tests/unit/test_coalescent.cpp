#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "oracles.hpp"
#include "symco/coalescent.hpp"
#include "symco/rates.hpp"

using namespace symco;

namespace {

// Transition counts and holding times of the block-counting chain aggregated over runs.
struct ChainStats {
  std::map<std::pair<int, int>, double> jumps;
  std::map<int, double> holding;
  void add(const CoalescentRun& run, int n) {
    int b = n;
    double prev = 0.0;
    for (const auto& e : run.events) {
      holding[b] += e.time - prev;
      jumps[{b, e.blocks_after}] += 1.0;
      prev = e.time;
      b = e.blocks_after;
    }
  }
  // Checks every q_ij estimate against q within 4 standard errors.
  void expect_matches(const GeneratorMatrix& q, int n) const {
    for (int i = 2; i <= n; ++i) {
      auto h = holding.find(i);
      if (h == holding.end() || h->second == 0.0) continue;
      for (int j = 1; j < i; ++j) {
        auto it = jumps.find({i, j});
        const double c = it == jumps.end() ? 0.0 : it->second;
        const double expected = q.rate(i, j) * h->second;
        EXPECT_NEAR(c, expected, 4.0 * std::sqrt(std::max(expected, 1.0)) + 1e-9) << i << "->" << j;
      }
    }
  }
};

double merge_frequency(int reps, std::int64_t k, bool wf) {
  Rng rng = make_stream(21, k);
  double merged = 0;
  for (int i = 0; i < reps; ++i) {
    const auto p = LabeledPartition::singletons(2);
    merged += (wf ? wf_ancestral_step(p, k, rng) : paintbox_merge(p, k, rng)).block_count() == 1;
  }
  return merged / reps;
}

}  // namespace

TEST(Partition, CanonicalForm) {
  LabeledPartition p({{3, 1}, {2}});
  EXPECT_EQ(p.blocks(), (std::vector<std::vector<int>>{{1, 3}, {2}}));
  EXPECT_TRUE(p.is_partition_of(3));
  EXPECT_FALSE(p.is_partition_of(4));
  const std::vector<int> g{0, 0};
  EXPECT_EQ(p.merged(g).block_count(), 1);
}

TEST(Paintbox, OneBoxCollapses) {
  Rng rng = make_stream(1, 0);
  EXPECT_EQ(paintbox_merge(LabeledPartition::singletons(9), 1, rng).block_count(), 1);
  EXPECT_EQ(wf_ancestral_step(LabeledPartition::singletons(9), 1, rng).block_count(), 1);
}

TEST(Paintbox, SingleBlockUnchanged) {
  Rng rng = make_stream(1, 1);
  LabeledPartition p({{1, 2, 3}});
  EXPECT_EQ(paintbox_merge(p, 17, rng), p);
  EXPECT_EQ(wf_ancestral_step(p, 17, rng), p);
}

TEST(Paintbox, TwoBlocksTwoBoxesMergeHalf) {
  const int m = 100000;
  const double tol = 4.0 * std::sqrt(0.25 / m);
  EXPECT_NEAR(merge_frequency(m, 2, false), 0.5, tol);
  EXPECT_NEAR(merge_frequency(m, 2, true), 0.5, tol);
}

TEST(Paintbox, OccupanciesSumToBlocks) {
  Rng rng = make_stream(1, 2);
  std::vector<int> occ;
  const auto q = paintbox_merge(LabeledPartition::singletons(12), 5, rng, &occ);
  int s = 0;
  for (int o : occ) s += o;
  EXPECT_EQ(s, 12);
  EXPECT_TRUE(q.is_partition_of(12));
}

TEST(Paintbox, BlockCountMatchesOccupancyLaw) {
  Rng rng = make_stream(1, 3);
  const int m = 50000;
  for (std::int64_t k : {3LL, 10LL, 1000000LL}) {
    const auto pmf = occupancy_pmf(k, 6);
    std::vector<double> obs(pmf.size(), 0.0), exp(pmf.size());
    for (int i = 0; i < m; ++i) obs[paintbox_block_count(6, k, rng) - 1] += 1;
    for (std::size_t j = 0; j < pmf.size(); ++j) exp[j] = pmf[j] * m;
    EXPECT_TRUE(oracle::chi_square_ok(oracle::chi_square(obs, exp))) << k;
  }
}

TEST(AncestralMatrix, Examples) {
  auto m = ancestral_count_matrix(2, 2);
  EXPECT_NEAR(m[1][0], 0.5, 1e-15);
  EXPECT_NEAR(m[1][1], 0.5, 1e-15);
  EXPECT_EQ(m[0][0], 1.0);
  m = ancestral_count_matrix(3, 3);
  EXPECT_NEAR(m[2][0], 1.0 / 9, 1e-15);
  EXPECT_NEAR(m[2][1], 6.0 / 9, 1e-15);
  EXPECT_NEAR(m[2][2], 2.0 / 9, 1e-15);
}

TEST(AncestralMatrix, MatchesEnumerationAndRowsSumToOne) {
  for (int k = 1; k <= 5; ++k) {
    const auto m = ancestral_count_matrix(k, 6);
    for (int j = 1; j <= 6; ++j) {
      double s = 0;
      for (int i = 1; i <= 6; ++i) {
        EXPECT_NEAR(m[j - 1][i - 1], oracle::ancestor_transition(k, j, i), 1e-14);
        s += m[j - 1][i - 1];
      }
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
  }
  const auto big = ancestral_count_matrix(1000000, 30);
  for (const auto& row : big) {
    double s = 0;
    for (double v : row) s += v;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(ConditionalCollision, MatchesConditionedEnumeration) {
  for (std::int64_t k : {2LL, 3LL, 5LL}) {
    const int b = 4;
    std::map<std::vector<int>, double> want;
    double total = 0;
    oracle::for_each_allocation(b, static_cast<int>(k), [&](const std::vector<int>& a) {
      if (oracle::distinct(a) == b) return;
      want[oracle::canonical_labels(a)] += 1;
      total += 1;
    });
    Rng rng = make_stream(5, k);
    const int m = 60000;
    std::map<std::vector<int>, double> got;
    for (int i = 0; i < m; ++i) got[oracle::canonical_labels(conditional_collision_groups(b, k, rng))] += 1;
    std::vector<double> obs, exp;
    for (auto& [key, c] : want) {
      obs.push_back(got[key]);
      exp.push_back(c / total * m);
    }
    EXPECT_EQ(got.size(), want.size());
    EXPECT_TRUE(oracle::chi_square_ok(oracle::chi_square(obs, exp))) << k;
  }
}

TEST(ConditionalCollision, LargeKAlwaysCollidesAndIsMostlyPair) {
  Rng rng = make_stream(6, 0);
  const int m = 20000;
  double pairs = 0;
  for (int i = 0; i < m; ++i) {
    const auto g = conditional_collision_groups(10, 1000000000LL, rng);
    const int r = oracle::distinct(g);
    ASSERT_LT(r, 10);
    pairs += r == 9;
  }
  EXPECT_GT(pairs / m, 0.99);
}

TEST(SCoalescent, StarCoalescent) {
  const auto f = CoagulationMeasure::explicit_masses({{1, 1.0}});
  RunningStats tm;
  for (int i = 0; i < 20000; ++i) {
    Rng rng = make_stream(7, i);
    const auto run = simulate_s_coalescent(f, 10, rng);
    ASSERT_EQ(run.events.size(), 1u);
    EXPECT_NEAR(run.stats.length, 10.0 * run.stats.tmrca, 1e-12 * run.stats.length);
    tm.add(run.stats.tmrca);
  }
  EXPECT_NEAR(tm.mean(), 1.0, 4.0 * tm.standard_error());
}

TEST(SCoalescent, KingmanThreeMeanTmrca) {
  RunningStats tm;
  for (int i = 0; i < 100000; ++i) {
    Rng rng = make_stream(8, i);
    tm.add(simulate_s_coalescent(CoagulationMeasure::kingman(), 3, rng, TrackMode::counts).stats.tmrca);
  }
  EXPECT_NEAR(tm.mean(), 4.0 / 3.0, 4.0 * tm.standard_error());
}

TEST(SCoalescent, PairRateHalfIsExponential) {
  std::vector<double> times;
  for (int i = 0; i < 20000; ++i) {
    Rng rng = make_stream(9, i);
    times.push_back(simulate_s_coalescent(CoagulationMeasure::explicit_masses({{2, 1.0}}), 2, rng).stats.tmrca);
  }
  const double d = oracle::ks_statistic(times, [](double t) { return 1.0 - std::exp(-0.5 * t); });
  EXPECT_LT(d * std::sqrt(static_cast<double>(times.size())), oracle::kKs4Sigma);
}

TEST(SCoalescent, EmptyMeasureRejected) {
  Rng rng = make_stream(10, 0);
  EXPECT_THROW(simulate_s_coalescent(CoagulationMeasure::explicit_masses({}), 5, rng), std::invalid_argument);
  EXPECT_THROW(simulate_s_coalescent(CoagulationMeasure::kingman(), 1, rng), std::invalid_argument);
}

TEST(SCoalescent, TrajectoryInvariants) {
  for (const auto& f : {CoagulationMeasure::power_law(0.7, std::nullopt, 0.5), CoagulationMeasure::power_law(1.4),
                        CoagulationMeasure::explicit_masses({{3, 1.0}, {50, 2.0}})}) {
    for (int rep = 0; rep < 200; ++rep) {
      Rng rng = make_stream(11, rep);
      const int n = 25;
      const auto run = simulate_s_coalescent(f, n, rng);
      int prev = n;
      double t = 0;
      for (const auto& e : run.events) {
        EXPECT_LT(e.blocks_after, prev);
        EXPECT_GE(e.time, t);
        EXPECT_EQ(e.partition_after.block_count(), e.blocks_after);
        EXPECT_TRUE(e.partition_after.is_partition_of(n));
        prev = e.blocks_after;
        t = e.time;
      }
      EXPECT_EQ(prev, 1);
      EXPECT_NEAR(recompute_length(run, n), run.stats.length, 1e-12 * run.stats.length);
      EXPECT_GE(run.stats.length, run.stats.tmrca);
    }
  }
}

TEST(SCoalescent, EstimatedRatesMatchGeneratorExplicit) {
  const auto f = CoagulationMeasure::explicit_masses({{2, 1.0}, {3, 0.5}, {6, 2.0}}, 0.3);
  const int n = 5;
  ChainStats s;
  for (int i = 0; i < 40000; ++i) {
    Rng rng = make_stream(12, i);
    s.add(simulate_s_coalescent(f, n, rng), n);
  }
  s.expect_matches(block_counting_generator(f, n), n);
}

TEST(SCoalescent, EstimatedRatesMatchGeneratorPowerLaw) {
  for (double beta : {0.6, 1.3}) {
    const auto f = CoagulationMeasure::power_law(beta);
    const int n = 6;
    ChainStats partitions, counts;
    for (int i = 0; i < 20000; ++i) {
      Rng rng = make_stream(13, i);
      partitions.add(simulate_s_coalescent(f, n, rng, TrackMode::partitions), n);
      Rng rng2 = make_stream(14, i);
      counts.add(simulate_s_coalescent(f, n, rng2, TrackMode::counts), n);
    }
    const auto q = block_counting_generator(f, n);
    partitions.expect_matches(q, n);
    counts.expect_matches(q, n);
  }
}

TEST(SCoalescent, LabelsAreExchangeable) {
  const auto f = CoagulationMeasure::explicit_masses({{3, 1.0}});
  const int n = 6, m = 30000;
  std::vector<double> hits(n, 0.0);
  for (int i = 0; i < m; ++i) {
    Rng rng = make_stream(15, i);
    const auto run = simulate_s_coalescent(f, n, rng);
    for (const auto& b : run.events.front().partition_after.blocks())
      if (b.size() > 1)
        for (int l : b) hits[l - 1] += 1;
  }
  double total = 0;
  for (double h : hits) total += h;
  std::vector<double> exp(n, total / n);
  EXPECT_TRUE(oracle::chi_square_ok(oracle::chi_square(hits, exp)));
}

TEST(Drastic, UnitDurationMatchesSymmetricGenerator) {
  const DiscreteLaw f0({{2, 0.5}, {4, 0.5}});
  const double eta = 1.5, a = 1.0;
  const int n = 4;
  ChainStats s;
  for (int i = 0; i < 40000; ++i) {
    Rng rng = make_stream(16, i);
    s.add(simulate_drastic_bottleneck_coalescent(f0, DiscreteLaw::point(1), eta, a, n, rng), n);
  }
  CoagulationMeasure f{a, f0.as_body(eta)};
  s.expect_matches(block_counting_generator(f, n), n);
}

TEST(Drastic, OneSurvivorCollapses) {
  for (int rep = 0; rep < 100; ++rep) {
    Rng rng = make_stream(17, rep);
    const auto run = simulate_drastic_bottleneck_coalescent(DiscreteLaw::point(1), DiscreteLaw({{1, 0.5}, {3, 0.5}}), 1.0,
                                                            0.0, 8, rng);
    ASSERT_EQ(run.events.size(), 1u);
    EXPECT_EQ(run.events[0].blocks_after, 1);
  }
}

TEST(Drastic, TwoGenerationPairMergeProbability) {
  // Merge probability per event 0.75, so the pair coalesces at rate 0.75.
  RunningStats tm;
  for (int i = 0; i < 50000; ++i) {
    Rng rng = make_stream(18, i);
    tm.add(simulate_drastic_bottleneck_coalescent(DiscreteLaw::point(2), DiscreteLaw::point(2), 1.0, 0.0, 2, rng,
                                                  TrackMode::counts)
               .stats.tmrca);
  }
  EXPECT_NEAR(tm.mean(), 1.0 / 0.75, 4.0 * tm.standard_error());
}

TEST(Drastic, PartitionAndCountModesAgree) {
  const DiscreteLaw f0({{3, 0.5}, {5, 0.5}}), l({{1, 0.3}, {4, 0.7}});
  const int n = 6;
  ChainStats p, c;
  for (int i = 0; i < 20000; ++i) {
    Rng r1 = make_stream(19, i), r2 = make_stream(20, i);
    p.add(simulate_drastic_bottleneck_coalescent(f0, l, 1.0, 1.0, n, r1, TrackMode::partitions), n);
    c.add(simulate_drastic_bottleneck_coalescent(f0, l, 1.0, 1.0, n, r2, TrackMode::counts), n);
  }
  // Both against the exact entries assembled from the occupancy law and the ancestral matrix.
  GeneratorMatrix q(n);
  for (int i = 2; i <= n; ++i) {
    std::vector<double> row(i + 1, 0.0);
    row[i - 1] += 0.5 * i * (i - 1);
    for (auto [k, pk] : f0.support())
      for (auto [g, pg] : l.support()) {
        std::vector<double> dist(n + 1, 0.0);
        dist[i] = 1.0;
        for (int step = 0; step < g; ++step) {
          std::vector<double> next(n + 1, 0.0);
          for (int from = 1; from <= n; ++from)
            for (int to = 1; to <= from; ++to) next[to] += dist[from] * oracle::ancestor_transition(static_cast<int>(k), from, to);
          dist = next;
        }
        for (int j = 1; j < i; ++j) row[j] += pk * pg * dist[j];
      }
    for (int j = 1; j < i; ++j) q.set_rate(i, j, row[j]);
  }
  p.expect_matches(q, n);
  c.expect_matches(q, n);
}

TEST(Subordinated, LongRunCollapses) {
  for (int rep = 0; rep < 100; ++rep) {
    Rng rng = make_stream(21, rep);
    const auto run = simulate_subordinated_kingman(PositiveLaw(PointMass{60.0}), 1.0, 0.0, 10, rng);
    ASSERT_EQ(run.events.size(), 1u);
    EXPECT_EQ(run.events[0].blocks_after, 1);
  }
}

TEST(Subordinated, PureKingmanPair) {
  RunningStats tm;
  for (int i = 0; i < 50000; ++i) {
    Rng rng = make_stream(22, i);
    tm.add(simulate_subordinated_kingman(PositiveLaw(PointMass{0.5}), 0.0, 1.0, 2, rng).stats.tmrca);
  }
  EXPECT_NEAR(tm.mean(), 1.0, 4.0 * tm.standard_error());
}

TEST(Subordinated, SoftPairMergeProbability) {
  RunningStats tm;
  for (int i = 0; i < 50000; ++i) {
    Rng rng = make_stream(23, i);
    tm.add(simulate_subordinated_kingman(PositiveLaw(PointMass{0.5}), 1.0, 0.0, 2, rng, TrackMode::counts).stats.tmrca);
  }
  EXPECT_NEAR(tm.mean(), 1.0 / (1.0 - std::exp(-0.5)), 4.0 * tm.standard_error());
}

TEST(TreeLength, StarAndKingman) {
  auto e = estimate_tree_length(CoagulationMeasure::explicit_masses({{1, 1.0}}), 10, 20000, 24);
  EXPECT_NEAR(e.mean, 10.0, 4.0 * e.standard_error);
  e = estimate_tree_length(CoagulationMeasure::kingman(), 100, 20000, 25);
  EXPECT_NEAR(e.mean, oracle::kingman_length_mean(100), 4.0 * e.standard_error);
}

TEST(TreeLength, IndependentOfWorkerCount) {
  const auto f = CoagulationMeasure::power_law(0.5);
  const auto a = estimate_tree_length(f, 30, 200, 26, 1);
  const auto b = estimate_tree_length(f, 30, 200, 26, 3);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.standard_error, b.standard_error);
}

TEST(TreeLength, SlopeWithinBracket) {
  const auto f = CoagulationMeasure::power_law(0.25);
  const auto a = estimate_tree_length(f, 64, 2000, 27);
  const auto b = estimate_tree_length(f, 256, 2000, 28);
  const double slope = std::log(b.mean / a.mean) / std::log(4.0);
  EXPECT_GE(slope, -0.15);
  EXPECT_LE(slope, 0.65);
}

TEST(Events, JsonLines) {
  Rng rng = make_stream(29, 0);
  const auto run = simulate_s_coalescent(CoagulationMeasure::kingman(), 4, rng);
  std::ostringstream out;
  write_events_jsonl(out, run);
  std::istringstream in(out.str());
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    EXPECT_NE(line.find("\"t\""), std::string::npos);
    EXPECT_NE(line.find("\"kind\""), std::string::npos);
    EXPECT_NE(line.find("\"blocks\""), std::string::npos);
    ++lines;
  }
  EXPECT_EQ(lines, 3);
}
