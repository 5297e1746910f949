#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "symco/ensemble.hpp"
#include "symco/forward.hpp"

using namespace symco;

namespace {

ShortDrastic short_delta(std::int64_t k, double alpha = 1.0) {
  return ShortDrastic{alpha, 0.25, CoagulationMeasure::explicit_masses({{k, 1.0}})};
}

}  // namespace

TEST(Forward, NoBottleneckAbsorbedAtZero) {
  Rng rng = make_stream(1, 0);
  const auto t = simulate_forward(IIDSizes{ConstantR{0.9999}}, 100, 0.0, 500, rng);
  for (std::size_t g = 0; g < t.length(); ++g) {
    EXPECT_EQ(t.sizes[g], 100u);
    EXPECT_EQ(t.counts[g], 0u);
  }
}

TEST(Forward, SingleSurvivorFixesOrLoses) {
  Rng rng = make_stream(2, 0);
  const auto t = simulate_forward(short_delta(1), 10000, 0.5, 200000, rng);
  int seen = 0;
  for (std::size_t g = 0; g < t.length(); ++g) {
    if (!t.in_bottleneck[g]) continue;
    ++seen;
    const double x = t.frequency(g);
    EXPECT_TRUE(x == 0.0 || x == 1.0);
    EXPECT_EQ(t.sizes[g], 1u);
  }
  EXPECT_GT(seen, 0);
}

TEST(Forward, CountsWithinSizesAndAbsorbing) {
  for (const Demography& d : std::vector<Demography>{
           short_delta(3, 0.8), LongDrastic{1.0, 2.0, DiscreteLaw({{2, 0.5}, {5, 0.5}}), DiscreteLaw({{1, 0.5}, {3, 0.5}})},
           LongSoft{1.0, 2.0, PositiveLaw(PointMass{0.5})}, IIDSizes{UniformR{0.2, 1.0}}}) {
    Rng rng = make_stream(3, d.index());
    const auto t = simulate_forward(d, 400, 0.3, 4000, rng);
    for (std::size_t g = 0; g < t.length(); ++g) {
      ASSERT_LE(t.counts[g], t.sizes[g]);
      ASSERT_GE(t.sizes[g], 1u);
      ASSERT_LE(t.sizes[g], 400u);
      if (g > 0 && t.counts[g - 1] == 0) ASSERT_EQ(t.counts[g], 0u);
      if (g > 0 && t.counts[g - 1] == t.sizes[g - 1]) ASSERT_EQ(t.counts[g], t.sizes[g]);
    }
  }
}

TEST(Forward, FrequencyIsMartingale) {
  for (const Demography& d : std::vector<Demography>{
           short_delta(2), LongDrastic{1.0, 3.0, DiscreteLaw::point(2), DiscreteLaw::point(2)},
           LongSoft{1.0, 3.0, PositiveLaw(PointMass{0.5})}, IIDSizes{UniformR{0.0, 1.0}}}) {
    const std::size_t gens = 150;
    std::vector<RunningStats> s(4);
    const std::size_t checkpoints[4] = {1, 10, 50, 150};
    for (int rep = 0; rep < 20000; ++rep) {
      Rng rng = make_stream(4 + d.index(), rep);
      const auto t = simulate_forward(d, 100, 0.4, gens, rng);
      for (int c = 0; c < 4; ++c) s[c].add(t.frequency(checkpoints[c]));
    }
    for (int c = 0; c < 4; ++c) EXPECT_NEAR(s[c].mean(), 0.4, 4.0 * s[c].standard_error()) << d.index() << " " << c;
  }
}

TEST(Forward, GeometricSpacing) {
  struct Case {
    Demography d;
    double mean_gap;
  };
  const std::int64_t n = 1000;
  for (const auto& c : std::vector<Case>{{short_delta(2), 1000.0},
                                         {LongDrastic{1.0, 4.0, DiscreteLaw::point(3), DiscreteLaw::point(2)}, 250.0},
                                         {LongSoft{1.0, 4.0, PositiveLaw(PointMass{0.25})}, 250.0}}) {
    Rng rng = make_stream(8, c.d.index());
    const auto t = simulate_sizes(c.d, n, 3'000'000, rng);
    const auto spans = bottleneck_spans(t);
    ASSERT_GT(spans.size(), 100u);
    RunningStats gaps;
    for (std::size_t i = 1; i < spans.size(); ++i) {
      const double g = static_cast<double>(spans[i].start - (spans[i - 1].start + spans[i - 1].length));
      // short bottlenecks: spacing between bottleneck generations
      gaps.add(std::holds_alternative<ShortDrastic>(c.d) ? g + 1.0 : g);
    }
    EXPECT_NEAR(gaps.mean(), c.mean_gap, 4.0 * gaps.standard_error()) << c.d.index();
  }
}

TEST(Forward, LongSoftDurationRule) {
  Rng rng = make_stream(9, 0);
  const std::int64_t n = 10000;
  const auto t = simulate_sizes(LongSoft{1.0, 5.0, PositiveLaw(PointMass{0.5})}, n, 200000, rng);
  for (const auto& s : bottleneck_spans(t)) {
    EXPECT_EQ(s.length, 50u);  // round(0.5 * N * N^{-1/2})
    EXPECT_EQ(t.sizes[s.start], 100u);
  }
}

TEST(Forward, ShortDrasticMass) {
  ShortDrastic d{1.0, 0.25, CoagulationMeasure::explicit_masses({{2, 0.5}, {3, 0.25}, {20, 0.25}})};
  EXPECT_EQ(short_drastic_mass(d, 10000), 0.75);  // 10000^{1/4} = 10
  Rng rng = make_stream(9, 1);
  EXPECT_THROW(simulate_sizes(ShortDrastic{1.0, 0.6, CoagulationMeasure::explicit_masses({{2, 1.0}})}, 100, 10, rng),
               std::invalid_argument);
}

TEST(Collapse, NoBottleneckIdentity) {
  Rng rng = make_stream(10, 0);
  const auto t = simulate_forward(IIDSizes{ConstantR{0.999}}, 50, 0.5, 100, rng);
  const auto c = collapse_bottlenecks(t);
  EXPECT_EQ(c.collapsed.counts, t.counts);
  EXPECT_EQ(c.collapsed.sizes, t.sizes);
  EXPECT_TRUE(c.spans.empty());
}

TEST(Collapse, RemovesBottleneckGenerations) {
  ForwardTrajectory t;
  t.population = 10;
  t.sizes = {10, 10, 2, 2, 2, 10, 10};
  t.counts = {5, 4, 1, 2, 1, 3, 3};
  t.in_bottleneck = {0, 0, 1, 1, 1, 0, 0};
  const auto c = collapse_bottlenecks(t);
  EXPECT_EQ(c.collapsed.length(), t.length() - 3);
  EXPECT_EQ(c.kept_generations, (std::vector<std::size_t>{0, 1, 5, 6}));
  ASSERT_EQ(c.spans.size(), 1u);
  EXPECT_EQ(c.spans[0].start, 2u);
  EXPECT_EQ(c.spans[0].length, 3u);
}

TEST(Rescale, ConstantAndFinalValue) {
  ForwardTrajectory t;
  t.population = 100;
  t.sizes.assign(101, 100);
  t.counts.assign(101, 30);
  t.in_bottleneck.assign(101, 0);
  auto p = rescale_time(t, 1.0, 1.0);
  EXPECT_EQ(p.jump_count(), 0u);
  EXPECT_EQ(p.final_value(), 0.3);
  Rng rng = make_stream(11, 0);
  const auto u = simulate_forward(IIDSizes{ConstantR{0.999}}, 100, 0.5, 100, rng);
  p = rescale_time(u, 1.0, 1.0);
  EXPECT_LE(p.jump_count(), 100u);
  EXPECT_EQ(p.final_value(), u.frequency(100));
  EXPECT_EQ(p.value_at(0.555), u.frequency(55));
  t.counts.pop_back();
  t.sizes.pop_back();
  t.in_bottleneck.pop_back();
  EXPECT_THROW(rescale_time(t, 1.0, 1.0), std::invalid_argument);
}

TEST(Ancestry, SingleSampleConstant) {
  Rng rng = make_stream(12, 0);
  const auto t = simulate_sizes(IIDSizes{ConstantR{0.999}}, 50, 30, rng);
  for (int b : sample_ancestry(t, 1, rng)) EXPECT_EQ(b, 1);
}

TEST(Ancestry, PairMergesAtRateOneOverN) {
  Rng rng = make_stream(13, 0);
  const auto t = simulate_sizes(IIDSizes{ConstantR{0.999}}, 20, 1, rng);
  const int m = 100000;
  double merged = 0;
  for (int i = 0; i < m; ++i) merged += sample_ancestry(t, 2, rng)[1] == 1;
  EXPECT_NEAR(merged / m, 0.05, 4.0 * std::sqrt(0.05 * 0.95 / m));
}

TEST(FamilySizes, SumAndMean) {
  Rng rng = make_stream(14, 0);
  RunningStats first;
  for (int i = 0; i < 20000; ++i) {
    const auto a = wf_family_sizes(5, 3, rng);
    std::uint32_t s = 0;
    for (auto v : a) s += v;
    ASSERT_EQ(s, 5u);
    first.add(a[0]);
  }
  EXPECT_NEAR(first.mean(), 1.0, 4.0 * first.standard_error());
  const auto id = wf_family_sizes(4, 0, rng);
  EXPECT_EQ(id, (std::vector<std::uint32_t>{1, 1, 1, 1}));
}

TEST(FamilySizes, TwoFoundersOneGeneration) {
  // a_1 ~ Binomial(2, 1/2)
  Rng rng = make_stream(15, 0);
  std::vector<double> obs(3, 0.0);
  const int m = 40000;
  for (int i = 0; i < m; ++i) obs[wf_family_sizes(2, 1, rng)[0]] += 1;
  EXPECT_TRUE(oracle::chi_square_ok(oracle::chi_square(obs, {m / 4.0, m / 2.0, m / 4.0})));
}

TEST(Mohle, UniformHarmonic) {
  const auto law = discretize_size_law(UniformR{0.0, 1.0}, 100);
  const auto c = mohle_coefficients(law, 100);
  double h = 0;
  for (int i = 1; i <= 100; ++i) h += 1.0 / i;
  EXPECT_NEAR(c.c, h / 100, 1e-15);
  EXPECT_NEAR(c.c, 0.0518738, 1e-7);
}

TEST(Mohle, BoundedBelowBrackets) {
  for (std::int64_t n : {1000LL, 10000LL}) {
    const auto c = mohle_coefficients(discretize_size_law(UniformR{0.2, 1.0}, n), n);
    const double nd = static_cast<double>(n);
    EXPECT_GE(c.c, 1.0 / nd);
    EXPECT_LE(c.c, 1.0 / (0.2 * nd));
    EXPECT_GE(c.d, 1.0 / (nd * nd));
    EXPECT_LE(c.d, 1.0 / (0.04 * nd * nd));
  }
}

TEST(Mohle, PointMassAtN) {
  const std::int64_t n = 500;
  const auto c = mohle_coefficients(discretize_size_law(ConstantR{(n - 0.5) / n}, n), n);
  EXPECT_DOUBLE_EQ(c.c, 1.0 / n);
  EXPECT_DOUBLE_EQ(c.d, 1.0 / (n * n));
}

TEST(Mohle, UniformRatioDecreasing) {
  double prev = INFINITY;
  for (std::int64_t n : {1000LL, 10000LL, 100000LL, 1000000LL}) {
    const auto c = mohle_coefficients(discretize_size_law(UniformR{0.0, 1.0}, n), n);
    EXPECT_LT(c.ratio(), prev);
    prev = c.ratio();
  }
  const auto c = mohle_coefficients(discretize_size_law(UniformR{0.0, 1.0}, 1000000), 1000000);
  const double s = 1e6 * c.c / std::log(1e6);
  EXPECT_GE(s, 0.95);
  EXPECT_LE(s, 1.10);
}

TEST(Mohle, RejectsBadLaw) {
  EXPECT_THROW(mohle_coefficients({0.5, 0.2}, 2), std::invalid_argument);
  EXPECT_THROW(mohle_coefficients({1.0}, 2), std::invalid_argument);
}

TEST(Alignment, MapsKeptGenerationsAndEndsAtHorizon) {
  Rng rng = make_stream(16, 0);
  const std::int64_t n = 1000;
  const auto t = simulate_forward(LongDrastic{1.0, 3.0, DiscreteLaw::point(2), DiscreteLaw::point(4)}, n, 0.5, 1300, rng);
  const auto c = collapse_bottlenecks(t);
  const Srt f = collapse_alignment(c, 1.0, 1.0);
  EXPECT_EQ(f(0.0), 0.0);
  EXPECT_DOUBLE_EQ(f(1.0), 1.0);
  const auto& kept = c.kept_generations;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const double u = kept[i] / 1000.0;
    if (u >= 1.0 - 2e-3 || kept[i] - i == 0) continue;
    // before the final catch-up window each kept generation lands on its collapsed index
    if (u < f.knots()[f.knots().size() - 2].first) EXPECT_NEAR(f(u), i / 1000.0, 1e-12);
  }
}

TEST(Trajectory, CsvHeader) {
  ForwardTrajectory t;
  t.population = 3;
  t.sizes = {3, 3};
  t.counts = {1, 2};
  t.in_bottleneck = {0, 0};
  std::ostringstream out;
  write_trajectory_csv(out, t);
  EXPECT_EQ(out.str(), "generation,size,count,in_bottleneck\n0,3,1,0\n1,3,2,0\n");
}
